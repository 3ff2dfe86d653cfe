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

// fwcbf: run scenarios, reproduce the three-vehicle counterexample and run
// the verification suite.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "fwcbf/counterexample.h"
#include "fwcbf/error.h"
#include "fwcbf/scenario.h"
#include "fwcbf/sim.h"
#include "verify/acceptance.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAbort = 2;

struct RunOptions {
  std::string preset;
  std::string config;
  std::string mode;
  std::string out_dir = "out";
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> kappa;
  std::optional<double> psi_deg;
  bool fallback = false;
};

int CmdRun(const RunOptions& opt) {
  fwcbf::ScenarioConfig cfg;
  try {
    if (opt.preset.empty() == opt.config.empty()) {
      throw fwcbf::Error(fwcbf::ErrorCode::kConfigError,
                         "give exactly one of --preset and --config");
    }
    cfg = opt.preset.empty() ? fwcbf::LoadScenarioConfig(opt.config)
                             : fwcbf::Preset(opt.preset);
    if (!opt.mode.empty()) {
      try {
        cfg.mode = fwcbf::ParseFilterMode(opt.mode);
      } catch (const fwcbf::Error& e) {
        throw fwcbf::Error(fwcbf::ErrorCode::kConfigError, e.message());
      }
    }
    if (opt.dt) cfg.dt = *opt.dt;
    if (opt.t_end) cfg.t_end = *opt.t_end;
    if (opt.kappa) cfg.alpha.kappa = *opt.kappa;
    if (opt.psi_deg) cfg.psi = *opt.psi_deg * fwcbf::kDegree;
    if (opt.fallback) cfg.fallback_maneuver = true;
    cfg.Validate();
  } catch (const fwcbf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  fwcbf::RunResult result;
  try {
    result = fwcbf::Run(cfg);
  } catch (const fwcbf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == fwcbf::ErrorCode::kConfigError ? kExitConfig
                                                      : kExitAbort;
  }

  try {
    std::filesystem::create_directories(opt.out_dir);
    const std::filesystem::path dir(opt.out_dir);
    fwcbf::WriteTrajectoryCsv((dir / "trajectory.csv").string(),
                              result.records);
    fwcbf::WritePairsCsv((dir / "pairs.csv").string(), result.records);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::cout << fwcbf::FormatSummary(cfg, result.summary);
  return result.summary.failure ? kExitAbort : kExitOk;
}

std::string Row(const Eigen::VectorXd& g) {
  std::string s;
  const char* names[] = {"v1", "w1", "v2", "w2", "v3", "w3"};
  for (int c = 0; c < g.size(); ++c) {
    if (std::abs(g(c)) < 1e-9) continue;
    if (s.empty()) {
      s = fmt::format("{:.6f} {}", g(c), names[c]);
    } else {
      s += fmt::format(" {} {:.6f} {}", g(c) < 0 ? '-' : '+', std::abs(g(c)),
                       names[c]);
    }
  }
  return s.empty() ? "0" : s;
}

int CmdCounterexample() {
  const fwcbf::CounterexampleReport r = fwcbf::AnalyzeCounterexample();
  const double c = r.setup.ExactCoefficient();
  constexpr double kTol = 1e-6;

  fmt::print("configuration: D_s = {}, r = {}, psi = {:.9f} rad, delta = {}\n",
             r.setup.d_s, r.setup.r, r.setup.psi, r.setup.delta);
  for (int l = 0; l < 3; ++l) {
    const auto& p = r.setup.x[l];
    fmt::print("  x{} = ({:.9f}, {:.9f}, {:.9f})\n", l + 1, p.px, p.py,
               p.theta);
  }

  bool h_ok = true;
  fmt::print("\nbarriers with separate maneuvers (right, left, left):\n");
  for (int j = 0; j < 3; ++j) {
    h_ok = h_ok && std::abs(r.h[j]) <= kTol;
    fmt::print("  h{} = {:.3e}\n", j + 1, r.h[j]);
  }
  fmt::print("  [{}] all h within {} of 0\n", h_ok ? "ok" : "FAIL", kTol);

  Eigen::VectorXd expect1(6), expect2(6);
  expect1 << -c, -c, -c, -c, 0, 0;
  expect2 << -c, c, 0, 0, -c, c;
  const double err1 = (r.rows[0].lie_g - expect1).cwiseAbs().maxCoeff();
  const double err2 = (r.rows[1].lie_g - expect2).cwiseAbs().maxCoeff();
  const bool rows_ok = err1 <= kTol && err2 <= kTol &&
                       std::abs(r.rows[0].lie_f) <= kTol &&
                       std::abs(r.rows[1].lie_f) <= kTol;
  fmt::print("\nconstraint rows (L_g h u + L_f h + h >= 0):\n");
  fmt::print("  row 1: {} >= 0\n", Row(r.rows[0].lie_g));
  fmt::print("  row 2: {} >= 0\n", Row(r.rows[1].lie_g));
  fmt::print("  [{}] coefficients are +-2 D_s sin(psi) = +-{:.9f} "
             "(max error {:.2e})\n",
             rows_ok ? "ok" : "FAIL", c, std::max(err1, err2));
  fmt::print("  note: +-0.4 is this value to one digit; the difference is "
             "{:.6f}\n",
             c - 0.4);

  fmt::print("\njoint QP under separate maneuvers:\n");
  fmt::print("  [{}] infeasible{}\n", r.joint_qp_infeasible ? "ok" : "FAIL",
             r.joint_qp_infeasible ? " (" + r.joint_qp_message + ")" : "");

  bool shared_ok = false;
  for (const fwcbf::SharedManeuverCheck& s : r.shared) {
    fmt::print("\nshared maneuver {}: gamma = [{}]\n", s.label,
               fmt::join(s.gamma.data(), s.gamma.data() + s.gamma.size(),
                         ", "));
    for (int j = 0; j < 3; ++j) {
      fmt::print("  h{} = {:+.6f}  L_f h + L_g h gamma = {:+.6f}\n", j + 1,
                 s.h[j], s.rate[j]);
    }
    const bool ok = s.gamma_in_bounds && s.rates_nonnegative;
    fmt::print("  [{}] gamma in U and satisfies every row\n",
               ok ? "ok" : "FAIL");
    fmt::print("  state in the safe set: {}; stacked QP feasible: {}\n",
               s.in_safe_set ? "yes" : "no", s.qp_feasible ? "yes" : "no");
    if (s.label == "all-left") shared_ok = ok;
  }

  const bool all = h_ok && rows_ok && r.joint_qp_infeasible && shared_ok;
  fmt::print("\n{}\n", all ? "all four facts verified" : "verification failed");
  return all ? kExitOk : kExitAbort;
}

int CmdVerify(int only) {
  int failures = 0;
  for (int id = 1; id <= fwcbf::verify::kNumCriteria; ++id) {
    if (only != 0 && id != only) continue;
    std::cout << "criterion " << id << ": "
              << fwcbf::verify::CriterionName(id) << " ..." << std::endl;
    const fwcbf::verify::CriterionResult r =
        fwcbf::verify::RunCriterion(id, &std::cout);
    std::cout << fwcbf::verify::FormatResult(r) << std::endl;
    if (!r.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed"
                              : fmt::format("{} criteria failed", failures))
            << "\n";
  return failures == 0 ? kExitOk : kExitAbort;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety filters for fixed-wing vehicles built from evading "
               "maneuvers"};
  app.require_subcommand(1);

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate a scenario");
  auto* preset_opt = run_cmd->add_option(
      "--preset", run.preset,
      "one of paper-2veh-turn, paper-2veh-straight, paper-20veh-turn, "
      "paper-20veh-straight");
  auto* config_opt =
      run_cmd->add_option("--config", run.config, "key = value config file");
  preset_opt->excludes(config_opt);
  run_cmd->add_option("--mode", run.mode, "centralized or decentralized");
  run_cmd->add_option("-o,--output", run.out_dir, "output directory")
      ->capture_default_str();
  run_cmd->add_option("--dt", run.dt, "time step, s");
  run_cmd->add_option("--t-end", run.t_end, "duration, s");
  run_cmd->add_option("--kappa", run.kappa, "alpha(h) = kappa h");
  run_cmd->add_option("--psi", run.psi_deg, "heading offset, degrees");
  run_cmd->add_flag("--fallback-maneuver", run.fallback,
                    "apply the shared maneuver when a QP is infeasible");

  CLI::App* cx_cmd = app.add_subcommand(
      "counterexample", "three vehicles with separate evading maneuvers");

  int only = 0;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the oracle and acceptance suite");
  verify_cmd->add_option("--criterion", only, "run only this criterion")
      ->check(CLI::Range(0, fwcbf::verify::kNumCriteria));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) return CmdRun(run);
  if (*cx_cmd) return CmdCounterexample();
  if (*verify_cmd) return CmdVerify(only);
  return kExitConfig;
}
