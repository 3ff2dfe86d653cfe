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

#include "fwcbf/counterexample.h"

#include <cmath>
#include <numbers>
#include <utility>

#include "fwcbf/error.h"
#include "fwcbf/qp.h"
#include "fwcbf/safety.h"

namespace fwcbf {
namespace {

constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

std::vector<BarrierRow> RowsOf(const std::vector<BarrierSpec>& barriers,
                               const StackedState& x) {
  std::vector<BarrierRow> rows;
  for (std::size_t j = 0; j < barriers.size(); ++j) {
    BarrierEval e = EvaluateBarrier(barriers[j], x);
    rows.push_back({e.value, e.lie_f, std::move(e.lie_g),
                    {kPairs[j][0], kPairs[j][1]}});
  }
  return rows;
}

bool StackedQpFeasible(const std::vector<BarrierRow>& rows,
                       const ControlBounds& bounds, std::string* message) {
  const ControlLayout layout = ControlLayout::Uniform(3, kControlDim);
  const Eigen::VectorXd u_hat =
      FlattenInputs(std::vector<ControlInput>(3, {bounds.v_min, 0.0}));
  const QpProblem qp = BuildCentralizedQp(
      rows, AlphaFunction{1.0}, u_hat, layout,
      std::vector<VehiclePolytope>(3, VehiclePolytope::FromBounds(bounds)));
  try {
    SolveQp(qp);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInfeasible) throw;
    if (message != nullptr) *message = e.message();
    return false;
  }
  return true;
}

}  // namespace

double CounterexampleSetup::ExactCoefficient() const {
  return 2.0 * d_s * std::sin(psi);
}

CounterexampleSetup MakeCounterexampleSetup() {
  CounterexampleSetup s;
  s.psi = std::acos((s.d_s / 2.0 + 2.0 * s.r) / (2.0 * s.r + s.d_s));
  const double reach = 2.0 * s.r + s.d_s;
  s.x.vehicles = {
      {0.0, 0.0, 0.0},
      {reach * std::sin(s.psi), reach * std::cos(s.psi) - 2.0 * s.r,
       std::numbers::pi},
      {reach * std::sin(s.psi), 2.0 * s.r - reach * std::cos(s.psi),
       std::numbers::pi},
  };
  return s;
}

std::vector<BarrierSpec> CounterexampleBarriers(
    const CounterexampleSetup& setup,
    const std::array<std::shared_ptr<const EvadingManeuver>, 3>& maneuvers) {
  std::vector<BarrierSpec> barriers;
  for (int j = 0; j < 3; ++j) {
    barriers.push_back({{SafetyKind::kAdjustedSq, kPairs[j][0], kPairs[j][1],
                         setup.d_s, setup.delta},
                        maneuvers[j]});
  }
  return barriers;
}

std::shared_ptr<const EvadingManeuver> AllRightTurn() {
  return std::make_shared<const EvadingManeuver>(
      EvadingManeuver::Turn(1.0, -1.0, {1.0, 1.0, 1.0}));
}

std::shared_ptr<const EvadingManeuver> AllLeftTurn() {
  return std::make_shared<const EvadingManeuver>(
      EvadingManeuver::Turn(1.0, 1.0, {1.0, 1.0, 1.0}));
}

std::shared_ptr<const EvadingManeuver> LeftStraightRight() {
  return std::make_shared<const EvadingManeuver>(EvadingManeuver::Mixed(
      {{1.0, 1.0}, {1.5, 0.0}, {2.0, -1.0}}, 4.0 * std::numbers::pi));
}

SharedManeuverCheck CheckSharedManeuver(
    const CounterexampleSetup& setup, const std::string& label,
    std::shared_ptr<const EvadingManeuver> maneuver, double tol) {
  SharedManeuverCheck check;
  check.label = label;
  check.gamma = maneuver->Stacked();
  const std::vector<BarrierRow> rows = RowsOf(
      CounterexampleBarriers(setup, {maneuver, maneuver, maneuver}), setup.x);
  check.gamma_in_bounds = true;
  for (const ControlInput& u : maneuver->inputs()) {
    check.gamma_in_bounds = check.gamma_in_bounds && setup.bounds.Contains(u);
  }
  check.rates_nonnegative = true;
  check.in_safe_set = true;
  for (int j = 0; j < 3; ++j) {
    check.h[j] = rows[j].h;
    check.rate[j] = rows[j].lie_f + rows[j].lie_g.dot(check.gamma);
    check.rates_nonnegative = check.rates_nonnegative && check.rate[j] >= -tol;
    check.in_safe_set = check.in_safe_set && rows[j].h >= 0.0;
  }
  check.qp_feasible = StackedQpFeasible(rows, setup.bounds, nullptr);
  return check;
}

CounterexampleReport AnalyzeCounterexample() {
  CounterexampleReport report;
  report.setup = MakeCounterexampleSetup();
  const auto right = AllRightTurn();
  const auto left = AllLeftTurn();
  const std::vector<BarrierRow> rows = RowsOf(
      CounterexampleBarriers(report.setup, {right, left, left}),
      report.setup.x);
  for (int j = 0; j < 3; ++j) {
    report.h[j] = rows[j].h;
    report.rows[j] = rows[j];
  }
  report.joint_qp_infeasible =
      !StackedQpFeasible(rows, report.setup.bounds, &report.joint_qp_message);
  report.shared.push_back(
      CheckSharedManeuver(report.setup, "all-left", left));
  report.shared.push_back(
      CheckSharedManeuver(report.setup, "left-straight-right",
                          LeftStraightRight()));
  return report;
}

}  // namespace fwcbf
