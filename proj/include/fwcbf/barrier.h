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

// Barrier functions built from a nominal evading maneuver: h(x) is the
// smallest value the safety function reaches if every vehicle flies its
// maneuver input forever, starting from x.
//
// Two maneuver families admit a closed form:
//   * Turn: all vehicles share one turn rate, vehicle l flies sigma_l * v.
//     The pair separation is a single sinusoid in omega * tau, so its minimum
//     is a constant minus the amplitude of a phasor sum.
//   * Straight: zero turn rate, pairwise distinct speeds. The separation is a
//     quadratic in tau.
// Anything else (kMixed) is evaluated by rollout over a finite horizon.

#ifndef FWCBF_BARRIER_H_
#define FWCBF_BARRIER_H_

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fwcbf/dynamics.h"
#include "fwcbf/safety.h"

namespace fwcbf {

enum class ManeuverKind { kTurn, kStraight, kMixed };

std::string_view ManeuverKindName(ManeuverKind kind);

// Constant-input evading maneuver shared by every barrier of a scenario.
class EvadingManeuver {
 public:
  // Vehicle l flies (sigma[l] * v, omega). Requires omega != 0, v > 0 and
  // every sigma[l] > 0.
  static EvadingManeuver Turn(double v, double omega,
                              std::vector<double> sigma);
  // Vehicle l flies (speeds[l], 0). Requires positive, pairwise distinct
  // speeds.
  static EvadingManeuver Straight(std::vector<double> speeds);
  // Arbitrary constant inputs. The infimum is searched over [0, horizon].
  static EvadingManeuver Mixed(std::vector<ControlInput> inputs,
                               double horizon);

  ManeuverKind kind() const { return kind_; }
  int num_vehicles() const { return static_cast<int>(inputs_.size()); }
  const ControlInput& input(int l) const { return inputs_.at(l); }
  std::span<const ControlInput> inputs() const { return inputs_; }

  // Turn only.
  double base_speed() const { return base_speed_; }
  double omega() const { return omega_; }
  double sigma(int l) const { return sigma_.at(l); }

  double search_horizon() const { return horizon_; }

  // gamma^s as a stacked input vector of length 2k.
  Eigen::VectorXd Stacked() const { return FlattenInputs(inputs_); }

  // Throws Error(kInvalidManeuver) unless every vehicle input lies strictly
  // inside the actuator box.
  void ValidateStrictlyInside(const ControlBounds& bounds) const;

 private:
  EvadingManeuver() = default;

  ManeuverKind kind_ = ManeuverKind::kTurn;
  std::vector<ControlInput> inputs_;
  std::vector<double> sigma_;
  double base_speed_ = 0.0;
  double omega_ = 0.0;
  double horizon_ = 0.0;
};

// One pairwise barrier h(x; rho, gamma).
struct BarrierSpec {
  SafetyFnSpec safety;
  std::shared_ptr<const EvadingManeuver> maneuver;

  int i() const { return safety.i; }
  int j() const { return safety.j; }
};

struct BarrierEval {
  double value = 0.0;
  double tau_star = 0.0;       // first minimizing time, seconds
  Eigen::VectorXd gradient;    // length 3k, empty if not computed
  double lie_f = 0.0;
  Eigen::VectorXd lie_g;       // length 2k, empty if not computed
};

struct LieDerivatives {
  double lie_f = 0.0;
  Eigen::VectorXd lie_g;
};

struct OracleResult {
  double value = 0.0;
  double tau_star = 0.0;
};

// Value and tau_star only. Turn requires an adjusted safety kind, Straight
// requires kEuclideanSq or kPlainSqrt.
BarrierEval TurnClosedForm(const BarrierSpec& spec, const StackedState& x);
BarrierEval StraightClosedForm(const BarrierSpec& spec, const StackedState& x);

// Rolls both vehicles of the pair out along the maneuver with AnalyticArc,
// takes the minimum of rho over a uniform tau grid on [0, horizon] and
// refines it by golden-section search in the bracketing cells.
OracleResult NumericBarrierMinimum(const BarrierSpec& spec,
                                   const StackedState& x, double horizon,
                                   double grid_dt);

// Gradient of h with respect to the stacked state (length 3k).
Eigen::VectorXd BarrierGradient(const BarrierSpec& spec,
                                const StackedState& x);

// L_f h = grad . f(x) and L_g h = grad . g(x) for the unicycle stack.
LieDerivatives ComputeLieDerivatives(const Eigen::VectorXd& gradient,
                                     const StackedState& x);

// h only; no gradient.
double BarrierValue(const BarrierSpec& spec, const StackedState& x);

// Value, tau_star, gradient and Lie derivatives in one pass.
BarrierEval EvaluateBarrier(const BarrierSpec& spec, const StackedState& x);

// Lie derivatives of rho itself, i.e. using the safety function directly as
// a barrier candidate.
LieDerivatives RhoLieDerivatives(const SafetyFnSpec& spec,
                                 const StackedState& x);

inline constexpr double kUniqueMinimizerTol = 1e-12;

}  // namespace fwcbf

#endif  // FWCBF_BARRIER_H_
