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

// The three-vehicle configuration where two pairwise barriers built from
// different evading maneuvers cannot be satisfied together, and the same
// configuration under a shared maneuver.

#ifndef FWCBF_COUNTEREXAMPLE_H_
#define FWCBF_COUNTEREXAMPLE_H_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fwcbf/barrier.h"
#include "fwcbf/dynamics.h"
#include "fwcbf/supervisor.h"

namespace fwcbf {

struct CounterexampleSetup {
  double d_s = 0.5;
  double r = 1.0;  // turn radius at (v_min, omega_max)
  double delta = 1e-9;
  ControlBounds bounds{1.0, 2.0, 1.0};
  double psi = 0.0;
  StackedState x;

  // Magnitude of every nonzero coefficient of the first two rows.
  double ExactCoefficient() const;
};

CounterexampleSetup MakeCounterexampleSetup();

// Barriers (0,1), (0,2), (1,2), each with its own maneuver.
std::vector<BarrierSpec> CounterexampleBarriers(
    const CounterexampleSetup& setup,
    const std::array<std::shared_ptr<const EvadingManeuver>, 3>& maneuvers);

std::shared_ptr<const EvadingManeuver> AllRightTurn();
std::shared_ptr<const EvadingManeuver> AllLeftTurn();
// Vehicle 1 turns left, vehicle 2 flies straight, vehicle 3 turns right.
std::shared_ptr<const EvadingManeuver> LeftStraightRight();

struct SharedManeuverCheck {
  std::string label;
  Eigen::VectorXd gamma;
  std::array<double, 3> h{};
  // L_f h + L_g h gamma^s for each barrier.
  std::array<double, 3> rate{};
  bool gamma_in_bounds = false;
  bool rates_nonnegative = false;  // gamma^s satisfies every row
  bool in_safe_set = false;        // all h >= 0
  bool qp_feasible = false;        // stacked QP with alpha(h) = h
};

struct CounterexampleReport {
  CounterexampleSetup setup;
  std::array<double, 3> h{};   // right, left, left
  std::array<BarrierRow, 3> rows;
  bool joint_qp_infeasible = false;
  std::string joint_qp_message;
  std::vector<SharedManeuverCheck> shared;  // all-left, then mixed
};

CounterexampleReport AnalyzeCounterexample();

SharedManeuverCheck CheckSharedManeuver(
    const CounterexampleSetup& setup, const std::string& label,
    std::shared_ptr<const EvadingManeuver> maneuver, double tol = 1e-9);

}  // namespace fwcbf

#endif  // FWCBF_COUNTEREXAMPLE_H_
