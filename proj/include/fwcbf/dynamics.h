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

// Unicycle vehicle model, stacked multi-vehicle state and trajectory
// propagation.

#ifndef FWCBF_DYNAMICS_H_
#define FWCBF_DYNAMICS_H_

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fwcbf {

inline constexpr int kStateDim = 3;    // px, py, theta
inline constexpr int kControlDim = 2;  // v, omega
inline constexpr double kDegree = std::numbers::pi / 180.0;

// Planar pose of one vehicle. Heading is never wrapped.
struct VehicleState {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;
};

struct ControlInput {
  double v = 0.0;
  double omega = 0.0;
};

// Time derivative of a VehicleState.
struct StateDerivative {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

// Poses of all vehicles in a fixed order. Vehicle l occupies coordinates
// [3l, 3l+3) of the flattened vector (px, py, theta).
struct StackedState {
  std::vector<VehicleState> vehicles;

  std::size_t size() const { return vehicles.size(); }
  VehicleState& operator[](std::size_t l) { return vehicles[l]; }
  const VehicleState& operator[](std::size_t l) const { return vehicles[l]; }

  Eigen::VectorXd Flatten() const;
  static StackedState FromFlat(const Eigen::VectorXd& flat);
};

// Vehicle l occupies coordinates [2l, 2l+2) of the flattened vector.
Eigen::VectorXd FlattenInputs(std::span<const ControlInput> inputs);
std::vector<ControlInput> UnflattenInputs(const Eigen::VectorXd& flat);

// Rows of the per-vehicle actuator polytope A_i u_i >= b_i.
struct InputPolytope {
  Eigen::Matrix<double, 4, 2> a;
  Eigen::Vector4d b;
};

// Box limits on (v, omega). v_min is strictly positive: a fixed-wing vehicle
// cannot stop.
struct ControlBounds {
  double v_min = 0.0;
  double v_max = 0.0;
  double omega_max = 0.0;

  // Throws Error(kInvalidArgument) unless 0 < v_min <= v_max, omega_max >= 0
  // and all fields are finite.
  void Validate() const;

  // Four rows: v >= v_min, -v >= -v_max, omega >= -omega_max,
  // -omega >= -omega_max.
  InputPolytope Polytope() const;

  bool Contains(const ControlInput& u, double slack = 0.0) const;
  bool StrictlyContains(const ControlInput& u) const;
  ControlInput Saturate(const ControlInput& u) const;
};

StateDerivative UnicycleFlow(const VehicleState& state,
                             const ControlInput& input);

// One classical fourth-order Runge-Kutta step with the inputs held constant
// over dt. inputs.size() must equal state.size().
StackedState IntegrateRk4(const StackedState& state,
                          std::span<const ControlInput> inputs, double dt);

// Exact pose after tau seconds of constant (v, omega). |omega| < 1e-12 is
// treated as a straight line.
VehicleState AnalyticArc(const VehicleState& state, const ControlInput& input,
                         double tau);

// Jacobian of AnalyticArc with respect to the initial pose.
Eigen::Matrix3d AnalyticArcJacobian(const VehicleState& state,
                                    const ControlInput& input, double tau);

inline constexpr double kStraightLineOmega = 1e-12;

}  // namespace fwcbf

#endif  // FWCBF_DYNAMICS_H_
