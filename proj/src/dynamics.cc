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

#include "fwcbf/dynamics.h"

#include <algorithm>
#include <cmath>

#include "fwcbf/error.h"

namespace fwcbf {

Eigen::VectorXd StackedState::Flatten() const {
  Eigen::VectorXd flat(kStateDim * static_cast<Eigen::Index>(size()));
  for (std::size_t l = 0; l < size(); ++l) {
    flat(3 * l) = vehicles[l].px;
    flat(3 * l + 1) = vehicles[l].py;
    flat(3 * l + 2) = vehicles[l].theta;
  }
  return flat;
}

StackedState StackedState::FromFlat(const Eigen::VectorXd& flat) {
  if (flat.size() % kStateDim != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "flattened state length is not a multiple of 3");
  }
  StackedState state;
  state.vehicles.resize(flat.size() / kStateDim);
  for (std::size_t l = 0; l < state.size(); ++l) {
    state.vehicles[l] = {flat(3 * l), flat(3 * l + 1), flat(3 * l + 2)};
  }
  return state;
}

Eigen::VectorXd FlattenInputs(std::span<const ControlInput> inputs) {
  Eigen::VectorXd flat(kControlDim * static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    flat(2 * l) = inputs[l].v;
    flat(2 * l + 1) = inputs[l].omega;
  }
  return flat;
}

std::vector<ControlInput> UnflattenInputs(const Eigen::VectorXd& flat) {
  if (flat.size() % kControlDim != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "flattened input length is not a multiple of 2");
  }
  std::vector<ControlInput> inputs(flat.size() / kControlDim);
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    inputs[l] = {flat(2 * l), flat(2 * l + 1)};
  }
  return inputs;
}

void ControlBounds::Validate() const {
  if (!std::isfinite(v_min) || !std::isfinite(v_max) ||
      !std::isfinite(omega_max)) {
    throw Error(ErrorCode::kInvalidArgument, "control bounds must be finite");
  }
  if (!(v_min > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "v_min must be > 0");
  }
  if (v_max < v_min) {
    throw Error(ErrorCode::kInvalidArgument, "v_max must be >= v_min");
  }
  if (omega_max < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "omega_max must be >= 0");
  }
}

InputPolytope ControlBounds::Polytope() const {
  InputPolytope p;
  p.a << 1.0, 0.0,   //
      -1.0, 0.0,     //
      0.0, 1.0,      //
      0.0, -1.0;
  p.b << v_min, -v_max, -omega_max, -omega_max;
  return p;
}

bool ControlBounds::Contains(const ControlInput& u, double slack) const {
  return u.v >= v_min - slack && u.v <= v_max + slack &&
         std::abs(u.omega) <= omega_max + slack;
}

bool ControlBounds::StrictlyContains(const ControlInput& u) const {
  return u.v > v_min && u.v < v_max && std::abs(u.omega) < omega_max;
}

ControlInput ControlBounds::Saturate(const ControlInput& u) const {
  return {std::clamp(u.v, v_min, v_max),
          std::clamp(u.omega, -omega_max, omega_max)};
}

StateDerivative UnicycleFlow(const VehicleState& state,
                             const ControlInput& input) {
  return {input.v * std::cos(state.theta), input.v * std::sin(state.theta),
          input.omega};
}

namespace {

VehicleState Advance(const VehicleState& s, const StateDerivative& d,
                     double h) {
  return {s.px + h * d.dx, s.py + h * d.dy, s.theta + h * d.dtheta};
}

}  // namespace

StackedState IntegrateRk4(const StackedState& state,
                          std::span<const ControlInput> inputs, double dt) {
  if (inputs.size() != state.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "IntegrateRk4 needs one input per vehicle");
  }
  StackedState next = state;
  for (std::size_t l = 0; l < state.size(); ++l) {
    const VehicleState& s = state[l];
    const ControlInput& u = inputs[l];
    const StateDerivative k1 = UnicycleFlow(s, u);
    const StateDerivative k2 = UnicycleFlow(Advance(s, k1, 0.5 * dt), u);
    const StateDerivative k3 = UnicycleFlow(Advance(s, k2, 0.5 * dt), u);
    const StateDerivative k4 = UnicycleFlow(Advance(s, k3, dt), u);
    next[l].px += dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    next[l].py += dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    next[l].theta +=
        dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  }
  return next;
}

VehicleState AnalyticArc(const VehicleState& state, const ControlInput& input,
                         double tau) {
  const double theta = state.theta + input.omega * tau;
  if (std::abs(input.omega) < kStraightLineOmega) {
    return {state.px + input.v * tau * std::cos(state.theta),
            state.py + input.v * tau * std::sin(state.theta), theta};
  }
  // Circle center (b0, c0) and signed radius v / omega.
  const double radius = input.v / input.omega;
  const double b0 = state.px - radius * std::sin(state.theta);
  const double c0 = state.py + radius * std::cos(state.theta);
  return {b0 + radius * std::sin(theta), c0 - radius * std::cos(theta), theta};
}

Eigen::Matrix3d AnalyticArcJacobian(const VehicleState& state,
                                    const ControlInput& input, double tau) {
  Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
  if (std::abs(input.omega) < kStraightLineOmega) {
    jac(0, 2) = -input.v * tau * std::sin(state.theta);
    jac(1, 2) = input.v * tau * std::cos(state.theta);
    return jac;
  }
  const double radius = input.v / input.omega;
  const double theta = state.theta + input.omega * tau;
  jac(0, 2) = radius * (std::cos(theta) - std::cos(state.theta));
  jac(1, 2) = radius * (std::sin(theta) - std::sin(state.theta));
  return jac;
}

}  // namespace fwcbf
