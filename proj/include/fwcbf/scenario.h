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

// Circle scenarios, the offset-point go-to-goal controller, compiled-in
// presets and the flat key=value config format.

#ifndef FWCBF_SCENARIO_H_
#define FWCBF_SCENARIO_H_

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fwcbf/barrier.h"
#include "fwcbf/dynamics.h"
#include "fwcbf/safety.h"
#include "fwcbf/supervisor.h"

namespace fwcbf {

enum class FilterMode { kCentralized, kDecentralized };

std::string_view FilterModeName(FilterMode mode);
// Accepts "centralized" and "decentralized".
FilterMode ParseFilterMode(std::string_view text);

// How the shared maneuver is derived from the actuator bounds. Unset speed
// and turn rate default to 0.9 v_min + 0.1 v_max and 0.9 omega_max. Empty
// sigma means all ones; empty speeds means (1 + 0.01 i) v for i = 1..k.
struct ManeuverChoice {
  ManeuverKind kind = ManeuverKind::kTurn;
  double v = 0.0;       // 0 = derive from bounds
  double omega = 0.0;   // 0 = derive from bounds
  std::vector<double> sigma;
  std::vector<double> speeds;
};

struct ScenarioConfig {
  std::string name = "custom";
  int k = 2;
  double radius = 200.0;
  double psi = 0.0;  // radians
  ControlBounds bounds{15.0, 25.0, 13.0 * kDegree};
  double d_s = 5.0;
  double delta = 0.01;
  AlphaFunction alpha;
  SafetyKind safety = SafetyKind::kAdjustedSqrt;
  ManeuverChoice maneuver;
  double lambda = 1.0;  // offset of the nominal controller, meters
  double dt = 0.02;
  double t_end = 40.0;
  FilterMode mode = FilterMode::kDecentralized;
  bool fallback_maneuver = false;
  // The run aborts once some h drops below -unsafe_tolerance.
  double unsafe_tolerance = -kUnsafeThreshold;

  // Throws Error(kConfigError) describing the first invalid field. Also
  // builds the maneuver and checks it lies strictly inside the bounds.
  void Validate() const;

  std::shared_ptr<const EvadingManeuver> BuildManeuver() const;
  ConstraintSet BuildConstraints() const;
};

struct GoalSpec {
  std::vector<std::array<double, 2>> goals;
};

// Vehicle l (0-based, i = l + 1) starts at R (cos(i 2pi/k + pi),
// sin(i 2pi/k + pi)) with heading i 2pi/k + psi and heads for
// R (cos(i 2pi/k), sin(i 2pi/k)). Throws Error(kUnsafeStart) if some
// barrier is negative at the start.
std::pair<StackedState, GoalSpec> BuildCircleScenario(
    const ScenarioConfig& cfg);

// Offset-point tracking with gain 1/s, saturated to the bounds.
ControlInput NominalController(const VehicleState& state,
                               const std::array<double, 2>& goal,
                               const ControlBounds& bounds,
                               double lambda = 1.0);

std::vector<std::string> PresetNames();
// Throws Error(kConfigError) listing the known names.
ScenarioConfig Preset(std::string_view name);

// Flat "key = value" lines; '#' starts a comment. A "preset" key, if
// present, must come first and seeds the remaining fields. Errors carry the
// line number.
ScenarioConfig ParseScenarioConfig(std::string_view text);
ScenarioConfig LoadScenarioConfig(const std::string& path);

}  // namespace fwcbf

#endif  // FWCBF_SCENARIO_H_
