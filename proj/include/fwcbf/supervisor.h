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

// Safety filters: turn pairwise barrier constraints into the centralized
// stacked QP and the per-vehicle decentralized QPs, and check admissibility
// of a given input.
//
// The row-level functions work on BarrierRow data and a ControlLayout, so
// they apply to any control-affine stack. The unicycle-level functions
// evaluate rows from a ConstraintSet first.

#ifndef FWCBF_SUPERVISOR_H_
#define FWCBF_SUPERVISOR_H_

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fwcbf/barrier.h"
#include "fwcbf/dynamics.h"
#include "fwcbf/qp.h"
#include "fwcbf/safety.h"

namespace fwcbf {

// alpha(h) = kappa * h.
struct AlphaFunction {
  double kappa = 1.0;

  double operator()(double h) const { return kappa * h; }
  void Validate() const;
};

// Barriers below this value mean the state has left the safe set.
inline constexpr double kUnsafeThreshold = -1e-6;
// Slack used by membership tests.
inline constexpr double kMembershipSlack = 1e-8;

// Offsets of each vehicle's input inside the stacked input vector.
class ControlLayout {
 public:
  explicit ControlLayout(std::vector<int> dims);
  static ControlLayout Uniform(int num_vehicles, int dim);

  int num_vehicles() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_.at(i); }
  int offset(int i) const { return offsets_.at(i); }
  int total() const { return total_; }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
};

// A_i u_i >= b_i. An empty polytope (zero rows) leaves u_i unconstrained.
struct VehiclePolytope {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;

  static VehiclePolytope FromBounds(const ControlBounds& bounds);
  bool Contains(const Eigen::VectorXd& u_i, double slack) const;
};

// Model-independent data of one barrier constraint at one state.
struct BarrierRow {
  double h = 0.0;
  double lie_f = 0.0;
  Eigen::VectorXd lie_g;  // length of the stacked input
  std::vector<int> zeta;  // vehicles whose input can affect this barrier
};

// L_f h + L_g h u + alpha(h).
double CentralizedRowValue(const BarrierRow& row, const AlphaFunction& alpha,
                           const Eigen::VectorXd& u);

// Left side of the decentralized row of vehicle i:
//   L_f h + [L_g h]_i u_i + alpha(h) + [L_g h]_{\i} gamma_{\i}
//     - (|zeta|-1)/|zeta| (L_f h + L_g h gamma + alpha(h)).
double DecentralizedRowValue(const BarrierRow& row, const AlphaFunction& alpha,
                             const ControlLayout& layout, int i,
                             const Eigen::VectorXd& u_i,
                             const Eigen::VectorXd& gamma);

QpProblem BuildCentralizedQp(const std::vector<BarrierRow>& rows,
                             const AlphaFunction& alpha,
                             const Eigen::VectorXd& u_hat,
                             const ControlLayout& layout,
                             const std::vector<VehiclePolytope>& polytopes);

// Only rows whose zeta contains i are used.
QpProblem BuildDecentralizedQp(const std::vector<BarrierRow>& rows,
                               const AlphaFunction& alpha,
                               const Eigen::VectorXd& u_hat_i,
                               const ControlLayout& layout, int i,
                               const VehiclePolytope& polytope,
                               const Eigen::VectorXd& gamma);

struct MembershipReport {
  std::vector<bool> actuator;          // per vehicle
  std::vector<bool> centralized_rows;  // per constraint
  // decentralized_rows[i][a] is the row of constraint a_sets[i][a].
  std::vector<std::vector<bool>> decentralized_rows;
  std::vector<bool> decentralized;     // per vehicle: u_i in K_i(x)
  bool centralized = false;            // u in K_cap(x)
  bool decentralized_all = false;      // u in the decentralized space
};

MembershipReport RowMembership(const std::vector<BarrierRow>& rows,
                               const AlphaFunction& alpha,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& gamma,
                               const ControlLayout& layout,
                               const std::vector<VehiclePolytope>& polytopes,
                               double slack = kMembershipSlack);

// sup over the actuator box of lie_g . u (per-coordinate vertex choice).
double SupremumOverBounds(const Eigen::VectorXd& lie_g,
                          const ControlBounds& bounds);

// Pairwise barriers that all share one evading maneuver.
struct ConstraintSet {
  int num_vehicles = 0;
  std::shared_ptr<const EvadingManeuver> maneuver;
  std::vector<BarrierSpec> barriers;         // q entries, pair order (0,1),(0,2),...
  std::vector<std::vector<int>> zeta;        // per constraint, sorted
  std::vector<std::vector<int>> a_sets;      // per vehicle, ascending

  int num_constraints() const { return static_cast<int>(barriers.size()); }
};

// All k(k-1)/2 pairs, each built from the same maneuver instance.
ConstraintSet BuildSharedManeuverConstraints(
    int k, SafetyKind kind, double d_s, double delta,
    std::shared_ptr<const EvadingManeuver> maneuver);

BarrierRow EvaluateRow(const ConstraintSet& cs, int j, const StackedState& x);
std::vector<BarrierRow> EvaluateRows(const ConstraintSet& cs,
                                     const StackedState& x);

struct FilterResult {
  Eigen::VectorXd u;       // stacked (centralized) or u_i (decentralized)
  int qp_iterations = 0;
  double min_h = 0.0;      // over the rows the filter looked at
  std::vector<double> h;   // h of those rows, in constraint order
};

// Throws Error(kUnsafeState) if some h^j < unsafe_threshold and
// Error(kInfeasible) if the stacked QP has no solution.
FilterResult CentralizedFilter(const ConstraintSet& cs,
                               const AlphaFunction& alpha,
                               const StackedState& x,
                               const Eigen::VectorXd& u_hat,
                               const ControlBounds& bounds,
                               double unsafe_threshold = kUnsafeThreshold);

// Uses only poses and the shared maneuver; never other vehicles' nominal
// inputs.
FilterResult DecentralizedFilter(const ConstraintSet& cs,
                                 const AlphaFunction& alpha,
                                 const StackedState& x,
                                 const ControlInput& u_hat_i, int i,
                                 const ControlBounds& bounds,
                                 double unsafe_threshold = kUnsafeThreshold);

MembershipReport AdmissibleMembership(const ConstraintSet& cs,
                                      const AlphaFunction& alpha,
                                      const StackedState& x,
                                      const Eigen::VectorXd& u,
                                      const ControlBounds& bounds);

}  // namespace fwcbf

#endif  // FWCBF_SUPERVISOR_H_
