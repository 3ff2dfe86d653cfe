// Copyright 2026 The fwcbf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fwcbf/scenario.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <system_error>

#include "fwcbf/error.h"

namespace fwcbf {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void ConfigFail(const std::string& message) {
  throw Error(ErrorCode::kConfigError, message);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double ParseDouble(std::string_view text) {
  text = Trim(text);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    ConfigFail("not a finite number: '" + std::string(text) + "'");
  }
  return value;
}

int ParseInt(std::string_view text) {
  text = Trim(text);
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    ConfigFail("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

bool ParseBool(std::string_view text) {
  text = Trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  ConfigFail("not a boolean: '" + std::string(text) + "'");
}

std::vector<double> ParseList(std::string_view text) {
  std::vector<double> values;
  text = Trim(text);
  if (text.empty()) return values;
  while (true) {
    const auto comma = text.find(',');
    values.push_back(ParseDouble(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return values;
}

ManeuverKind ParseManeuverKind(std::string_view text) {
  if (text == "turn") return ManeuverKind::kTurn;
  if (text == "straight") return ManeuverKind::kStraight;
  ConfigFail("unknown maneuver '" + std::string(text) +
             "' (expected turn or straight)");
}

void ApplyKey(ScenarioConfig& cfg, std::string_view key,
              std::string_view value) {
  if (key == "name") {
    cfg.name = std::string(value);
  } else if (key == "k") {
    cfg.k = ParseInt(value);
  } else if (key == "radius") {
    cfg.radius = ParseDouble(value);
  } else if (key == "psi_deg") {
    cfg.psi = ParseDouble(value) * kDegree;
  } else if (key == "v_min") {
    cfg.bounds.v_min = ParseDouble(value);
  } else if (key == "v_max") {
    cfg.bounds.v_max = ParseDouble(value);
  } else if (key == "omega_max_deg") {
    cfg.bounds.omega_max = ParseDouble(value) * kDegree;
  } else if (key == "d_s") {
    cfg.d_s = ParseDouble(value);
  } else if (key == "delta") {
    cfg.delta = ParseDouble(value);
  } else if (key == "kappa") {
    cfg.alpha.kappa = ParseDouble(value);
  } else if (key == "safety") {
    try {
      cfg.safety = ParseSafetyKind(value);
    } catch (const Error& e) {
      ConfigFail(e.message());
    }
  } else if (key == "maneuver") {
    cfg.maneuver.kind = ParseManeuverKind(value);
  } else if (key == "maneuver_v") {
    cfg.maneuver.v = ParseDouble(value);
  } else if (key == "maneuver_omega_deg") {
    cfg.maneuver.omega = ParseDouble(value) * kDegree;
  } else if (key == "maneuver_sigma") {
    cfg.maneuver.sigma = ParseList(value);
  } else if (key == "maneuver_speeds") {
    cfg.maneuver.speeds = ParseList(value);
  } else if (key == "lambda") {
    cfg.lambda = ParseDouble(value);
  } else if (key == "dt") {
    cfg.dt = ParseDouble(value);
  } else if (key == "t_end") {
    cfg.t_end = ParseDouble(value);
  } else if (key == "mode") {
    try {
      cfg.mode = ParseFilterMode(value);
    } catch (const Error& e) {
      ConfigFail(e.message());
    }
  } else if (key == "unsafe_tolerance") {
    cfg.unsafe_tolerance = ParseDouble(value);
  } else if (key == "fallback_maneuver") {
    cfg.fallback_maneuver = ParseBool(value);
  } else {
    ConfigFail("unknown key '" + std::string(key) + "'");
  }
}

constexpr double kPresetDt = 0.005;

ScenarioConfig BasePreset(double psi_deg, int k) {
  ScenarioConfig cfg;
  cfg.k = k;
  cfg.psi = psi_deg * kDegree;
  cfg.dt = kPresetDt;
  return cfg;
}

}  // namespace

std::string_view FilterModeName(FilterMode mode) {
  return mode == FilterMode::kCentralized ? "centralized" : "decentralized";
}

FilterMode ParseFilterMode(std::string_view text) {
  if (text == "centralized") return FilterMode::kCentralized;
  if (text == "decentralized") return FilterMode::kDecentralized;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown mode '" + std::string(text) +
                  "' (expected centralized or decentralized)");
}

std::shared_ptr<const EvadingManeuver> ScenarioConfig::BuildManeuver() const {
  const double v = maneuver.v != 0.0
                       ? maneuver.v
                       : 0.9 * bounds.v_min + 0.1 * bounds.v_max;
  const double omega =
      maneuver.omega != 0.0 ? maneuver.omega : 0.9 * bounds.omega_max;
  if (maneuver.kind == ManeuverKind::kTurn) {
    std::vector<double> sigma = maneuver.sigma;
    if (sigma.empty()) sigma.assign(k, 1.0);
    if (static_cast<int>(sigma.size()) != k) {
      ConfigFail("maneuver_sigma needs " + std::to_string(k) + " entries");
    }
    return std::make_shared<const EvadingManeuver>(
        EvadingManeuver::Turn(v, omega, std::move(sigma)));
  }
  if (maneuver.kind == ManeuverKind::kStraight) {
    std::vector<double> speeds = maneuver.speeds;
    if (speeds.empty()) {
      for (int i = 1; i <= k; ++i) speeds.push_back((1.0 + 0.01 * i) * v);
    }
    if (static_cast<int>(speeds.size()) != k) {
      ConfigFail("maneuver_speeds needs " + std::to_string(k) + " entries");
    }
    return std::make_shared<const EvadingManeuver>(
        EvadingManeuver::Straight(std::move(speeds)));
  }
  ConfigFail("scenarios support turn and straight maneuvers only");
}

void ScenarioConfig::Validate() const {
  if (k < 2) ConfigFail("k must be >= 2");
  if (!(radius > 0.0)) ConfigFail("radius must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) ConfigFail("dt must be > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    ConfigFail("t_end must be >= 0");
  }
  if (!(lambda > 0.0)) ConfigFail("lambda must be > 0");
  if (!(unsafe_tolerance >= 0.0) || !std::isfinite(unsafe_tolerance)) {
    ConfigFail("unsafe_tolerance must be >= 0");
  }
  if (!std::isfinite(psi)) ConfigFail("psi must be finite");
  try {
    bounds.Validate();
    alpha.Validate();
    SafetyFnSpec{safety, 0, 1, d_s, delta}.Validate();
    const auto m = BuildManeuver();
    m->ValidateStrictlyInside(bounds);
    const bool adjusted = IsAdjustedKind(safety);
    if (m->kind() == ManeuverKind::kTurn && !adjusted) {
      ConfigFail("turn maneuver needs an adjusted safety function");
    }
    if (m->kind() == ManeuverKind::kStraight && adjusted) {
      ConfigFail("straight maneuver needs euclidean_sq or plain_sqrt");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    ConfigFail(e.message());
  }
}

ConstraintSet ScenarioConfig::BuildConstraints() const {
  return BuildSharedManeuverConstraints(k, safety, d_s, delta,
                                        BuildManeuver());
}

std::pair<StackedState, GoalSpec> BuildCircleScenario(
    const ScenarioConfig& cfg) {
  cfg.Validate();
  StackedState x;
  GoalSpec goals;
  for (int l = 0; l < cfg.k; ++l) {
    const double a = (l + 1) * kTwoPi / cfg.k;
    x.vehicles.push_back({cfg.radius * std::cos(a + std::numbers::pi),
                          cfg.radius * std::sin(a + std::numbers::pi),
                          a + cfg.psi});
    goals.goals.push_back({cfg.radius * std::cos(a), cfg.radius * std::sin(a)});
  }
  const ConstraintSet cs = cfg.BuildConstraints();
  for (int j = 0; j < cs.num_constraints(); ++j) {
    double h = 0.0;
    try {
      h = BarrierValue(cs.barriers[j], x);
    } catch (const Error& e) {
      throw Error(ErrorCode::kUnsafeStart,
                  "pair (" + std::to_string(cs.zeta[j][0]) + ", " +
                      std::to_string(cs.zeta[j][1]) + "): " + e.what());
    }
    if (h < 0.0) {
      std::ostringstream msg;
      msg << "pair (" << cs.zeta[j][0] << ", " << cs.zeta[j][1]
          << ") starts with h = " << h;
      throw Error(ErrorCode::kUnsafeStart, msg.str());
    }
  }
  return {std::move(x), std::move(goals)};
}

ControlInput NominalController(const VehicleState& state,
                               const std::array<double, 2>& goal,
                               const ControlBounds& bounds, double lambda) {
  constexpr double kGain = 1.0;
  const double c = std::cos(state.theta);
  const double s = std::sin(state.theta);
  const double wx = kGain * (goal[0] - (state.px + lambda * c));
  const double wy = kGain * (goal[1] - (state.py + lambda * s));
  return bounds.Saturate({c * wx + s * wy, (-s * wx + c * wy) / lambda});
}

std::vector<std::string> PresetNames() {
  return {"paper-2veh-turn", "paper-2veh-straight", "paper-20veh-turn",
          "paper-20veh-straight"};
}

ScenarioConfig Preset(std::string_view name) {
  ScenarioConfig cfg;
  if (name == "paper-2veh-turn") {
    cfg = BasePreset(0.0, 2);
    cfg.maneuver.sigma = {1.1, 1.0};
  } else if (name == "paper-2veh-straight") {
    cfg = BasePreset(2.0, 2);
    cfg.safety = SafetyKind::kPlainSqrt;
    cfg.maneuver.kind = ManeuverKind::kStraight;
    const double v = 0.9 * cfg.bounds.v_min + 0.1 * cfg.bounds.v_max;
    cfg.maneuver.speeds = {1.1 * v, v};
  } else if (name == "paper-20veh-turn") {
    cfg = BasePreset(0.0, 20);
  } else if (name == "paper-20veh-straight") {
    cfg = BasePreset(25.0, 20);
    cfg.safety = SafetyKind::kPlainSqrt;
    cfg.maneuver.kind = ManeuverKind::kStraight;
    // Nearly parallel neighbours with 1% speed differences give |grad h| in
    // the thousands; the sampled-data loop then settles slightly below zero.
    cfg.unsafe_tolerance = 0.05;
  } else {
    std::string known;
    for (const std::string& n : PresetNames()) {
      known += known.empty() ? n : ", " + n;
    }
    ConfigFail("unknown preset '" + std::string(name) + "'; known presets: " +
               known);
  }
  cfg.name = std::string(name);
  return cfg;
}

ScenarioConfig ParseScenarioConfig(std::string_view text) {
  ScenarioConfig cfg;
  int line_no = 0;
  bool seen_key = false;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string prefix = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) {
      ConfigFail(prefix + "expected 'key = value', got '" +
                 std::string(line) + "'");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    try {
      if (key == "preset") {
        if (seen_key) ConfigFail("'preset' must be the first key");
        cfg = Preset(value);
      } else {
        ApplyKey(cfg, key, value);
      }
    } catch (const Error& e) {
      ConfigFail(prefix + e.message());
    }
    seen_key = true;
  }
  return cfg;
}

ScenarioConfig LoadScenarioConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) ConfigFail("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseScenarioConfig(buffer.str());
  } catch (const Error& e) {
    ConfigFail(path + ": " + e.message());
  }
}

}  // namespace fwcbf
