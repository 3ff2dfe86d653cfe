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

#include "fwcbf/supervisor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "fwcbf/error.h"

namespace fwcbf {
namespace {

bool ZetaContains(const BarrierRow& row, int i) {
  return std::find(row.zeta.begin(), row.zeta.end(), i) != row.zeta.end();
}

void CheckUnsafe(const BarrierRow& row, int j, double threshold) {
  if (row.h < threshold) {
    throw Error(ErrorCode::kUnsafeState,
                "barrier " + std::to_string(j) + " has h = " +
                    std::to_string(row.h) + " below " +
                    std::to_string(threshold));
  }
}

std::vector<VehiclePolytope> UniformPolytopes(int k,
                                              const ControlBounds& bounds) {
  return std::vector<VehiclePolytope>(k, VehiclePolytope::FromBounds(bounds));
}

}  // namespace

void AlphaFunction::Validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha gain kappa must be > 0");
  }
}

ControlLayout::ControlLayout(std::vector<int> dims) : dims_(std::move(dims)) {
  offsets_.reserve(dims_.size());
  for (int d : dims_) {
    if (d < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "every vehicle needs at least one input");
    }
    offsets_.push_back(total_);
    total_ += d;
  }
}

ControlLayout ControlLayout::Uniform(int num_vehicles, int dim) {
  return ControlLayout(std::vector<int>(num_vehicles, dim));
}

VehiclePolytope VehiclePolytope::FromBounds(const ControlBounds& bounds) {
  const InputPolytope p = bounds.Polytope();
  return {p.a, p.b};
}

bool VehiclePolytope::Contains(const Eigen::VectorXd& u_i,
                               double slack) const {
  if (a.rows() == 0) return true;
  return ((a * u_i - b).array() >= -slack).all();
}

double CentralizedRowValue(const BarrierRow& row, const AlphaFunction& alpha,
                           const Eigen::VectorXd& u) {
  return row.lie_f + row.lie_g.dot(u) + alpha(row.h);
}

double DecentralizedRowValue(const BarrierRow& row, const AlphaFunction& alpha,
                             const ControlLayout& layout, int i,
                             const Eigen::VectorXd& u_i,
                             const Eigen::VectorXd& gamma) {
  const int off = layout.offset(i);
  const int dim = layout.dim(i);
  const double zeta = static_cast<double>(row.zeta.size());
  const double own = row.lie_g.segment(off, dim).dot(u_i);
  const double own_gamma = row.lie_g.segment(off, dim).dot(gamma.segment(off, dim));
  const double full_gamma = row.lie_g.dot(gamma);
  const double a = alpha(row.h);
  return row.lie_f + own + a + (full_gamma - own_gamma) -
         (zeta - 1.0) / zeta * (row.lie_f + full_gamma + a);
}

QpProblem BuildCentralizedQp(const std::vector<BarrierRow>& rows,
                             const AlphaFunction& alpha,
                             const Eigen::VectorXd& u_hat,
                             const ControlLayout& layout,
                             const std::vector<VehiclePolytope>& polytopes) {
  const int m = layout.total();
  if (u_hat.size() != m ||
      static_cast<int>(polytopes.size()) != layout.num_vehicles()) {
    throw Error(ErrorCode::kInvalidArgument,
                "centralized QP inputs do not match the control layout");
  }
  QpProblem qp;
  qp.u_hat = u_hat;
  qp.g_matrix.resize(0, m);
  for (int i = 0; i < layout.num_vehicles(); ++i) {
    const VehiclePolytope& poly = polytopes[i];
    for (Eigen::Index r = 0; r < poly.a.rows(); ++r) {
      Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(m);
      g.segment(layout.offset(i), layout.dim(i)) = poly.a.row(r);
      qp.AddRow(g, poly.b(r));
    }
  }
  for (const BarrierRow& row : rows) {
    qp.AddRow(row.lie_g.transpose(), -row.lie_f - alpha(row.h));
  }
  return qp;
}

QpProblem BuildDecentralizedQp(const std::vector<BarrierRow>& rows,
                               const AlphaFunction& alpha,
                               const Eigen::VectorXd& u_hat_i,
                               const ControlLayout& layout, int i,
                               const VehiclePolytope& polytope,
                               const Eigen::VectorXd& gamma) {
  const int dim = layout.dim(i);
  const int off = layout.offset(i);
  if (u_hat_i.size() != dim || gamma.size() != layout.total()) {
    throw Error(ErrorCode::kInvalidArgument,
                "decentralized QP inputs do not match the control layout");
  }
  QpProblem qp;
  qp.u_hat = u_hat_i;
  qp.g_matrix.resize(0, dim);
  for (Eigen::Index r = 0; r < polytope.a.rows(); ++r) {
    qp.AddRow(polytope.a.row(r), polytope.b(r));
  }
  const Eigen::VectorXd zero_i = Eigen::VectorXd::Zero(dim);
  for (const BarrierRow& row : rows) {
    if (!ZetaContains(row, i)) continue;
    // The row is affine in u_i; its constant part is the value at u_i = 0.
    const double constant =
        DecentralizedRowValue(row, alpha, layout, i, zero_i, gamma);
    qp.AddRow(row.lie_g.segment(off, dim).transpose(), -constant);
  }
  return qp;
}

MembershipReport RowMembership(const std::vector<BarrierRow>& rows,
                               const AlphaFunction& alpha,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& gamma,
                               const ControlLayout& layout,
                               const std::vector<VehiclePolytope>& polytopes,
                               double slack) {
  const int k = layout.num_vehicles();
  MembershipReport report;
  report.actuator.resize(k);
  report.decentralized_rows.resize(k);
  report.decentralized.resize(k);
  bool actuator_all = true;
  for (int i = 0; i < k; ++i) {
    report.actuator[i] = polytopes[i].Contains(
        u.segment(layout.offset(i), layout.dim(i)), slack);
    actuator_all = actuator_all && report.actuator[i];
  }
  bool rows_all = true;
  for (const BarrierRow& row : rows) {
    const bool ok = CentralizedRowValue(row, alpha, u) >= -slack;
    report.centralized_rows.push_back(ok);
    rows_all = rows_all && ok;
  }
  report.centralized = actuator_all && rows_all;

  report.decentralized_all = true;
  for (int i = 0; i < k; ++i) {
    bool ok_i = report.actuator[i];
    const Eigen::VectorXd u_i = u.segment(layout.offset(i), layout.dim(i));
    for (const BarrierRow& row : rows) {
      if (!ZetaContains(row, i)) continue;
      const bool ok =
          DecentralizedRowValue(row, alpha, layout, i, u_i, gamma) >= -slack;
      report.decentralized_rows[i].push_back(ok);
      ok_i = ok_i && ok;
    }
    report.decentralized[i] = ok_i;
    report.decentralized_all = report.decentralized_all && ok_i;
  }
  return report;
}

double SupremumOverBounds(const Eigen::VectorXd& lie_g,
                          const ControlBounds& bounds) {
  if (lie_g.size() % kControlDim != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "lie_g length is not a multiple of 2");
  }
  double sup = 0.0;
  for (Eigen::Index l = 0; l < lie_g.size() / kControlDim; ++l) {
    const double gv = lie_g(2 * l);
    const double gw = lie_g(2 * l + 1);
    sup += gv >= 0.0 ? gv * bounds.v_max : gv * bounds.v_min;
    sup += std::abs(gw) * bounds.omega_max;
  }
  return sup;
}

ConstraintSet BuildSharedManeuverConstraints(
    int k, SafetyKind kind, double d_s, double delta,
    std::shared_ptr<const EvadingManeuver> maneuver) {
  if (k < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two vehicles");
  }
  if (maneuver == nullptr || maneuver->num_vehicles() != k) {
    throw Error(ErrorCode::kInvalidManeuver,
                "shared maneuver must cover all " + std::to_string(k) +
                    " vehicles");
  }
  ConstraintSet cs;
  cs.num_vehicles = k;
  cs.maneuver = std::move(maneuver);
  cs.a_sets.resize(k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      SafetyFnSpec safety{kind, i, j, d_s, delta};
      safety.Validate();
      const int index = cs.num_constraints();
      cs.barriers.push_back({safety, cs.maneuver});
      cs.zeta.push_back({i, j});
      cs.a_sets[i].push_back(index);
      cs.a_sets[j].push_back(index);
    }
  }
  return cs;
}

BarrierRow EvaluateRow(const ConstraintSet& cs, int j, const StackedState& x) {
  BarrierEval eval = EvaluateBarrier(cs.barriers.at(j), x);
  BarrierRow row;
  row.h = eval.value;
  row.lie_f = eval.lie_f;
  row.lie_g = std::move(eval.lie_g);
  row.zeta = cs.zeta.at(j);
  return row;
}

std::vector<BarrierRow> EvaluateRows(const ConstraintSet& cs,
                                     const StackedState& x) {
  std::vector<BarrierRow> rows;
  rows.reserve(cs.barriers.size());
  for (int j = 0; j < cs.num_constraints(); ++j) {
    rows.push_back(EvaluateRow(cs, j, x));
  }
  return rows;
}

FilterResult CentralizedFilter(const ConstraintSet& cs,
                               const AlphaFunction& alpha,
                               const StackedState& x,
                               const Eigen::VectorXd& u_hat,
                               const ControlBounds& bounds,
                               double unsafe_threshold) {
  const std::vector<BarrierRow> rows = EvaluateRows(cs, x);
  FilterResult result;
  result.min_h = std::numeric_limits<double>::infinity();
  for (int j = 0; j < static_cast<int>(rows.size()); ++j) {
    CheckUnsafe(rows[j], j, unsafe_threshold);
    result.min_h = std::min(result.min_h, rows[j].h);
    result.h.push_back(rows[j].h);
  }
  const ControlLayout layout = ControlLayout::Uniform(cs.num_vehicles, 2);
  const QpProblem qp = BuildCentralizedQp(
      rows, alpha, u_hat, layout, UniformPolytopes(cs.num_vehicles, bounds));
  QpSolution solution = SolveQp(qp);
  result.u = std::move(solution.u_star);
  result.qp_iterations = solution.iterations;
  return result;
}

FilterResult DecentralizedFilter(const ConstraintSet& cs,
                                 const AlphaFunction& alpha,
                                 const StackedState& x,
                                 const ControlInput& u_hat_i, int i,
                                 const ControlBounds& bounds,
                                 double unsafe_threshold) {
  std::vector<BarrierRow> rows;
  FilterResult result;
  result.min_h = std::numeric_limits<double>::infinity();
  for (int j : cs.a_sets.at(i)) {
    rows.push_back(EvaluateRow(cs, j, x));
    CheckUnsafe(rows.back(), j, unsafe_threshold);
    result.min_h = std::min(result.min_h, rows.back().h);
    result.h.push_back(rows.back().h);
  }
  const ControlLayout layout = ControlLayout::Uniform(cs.num_vehicles, 2);
  const QpProblem qp = BuildDecentralizedQp(
      rows, alpha, Eigen::Vector2d(u_hat_i.v, u_hat_i.omega), layout, i,
      VehiclePolytope::FromBounds(bounds), cs.maneuver->Stacked());
  QpSolution solution = SolveQp(qp);
  result.u = std::move(solution.u_star);
  result.qp_iterations = solution.iterations;
  return result;
}

MembershipReport AdmissibleMembership(const ConstraintSet& cs,
                                      const AlphaFunction& alpha,
                                      const StackedState& x,
                                      const Eigen::VectorXd& u,
                                      const ControlBounds& bounds) {
  const ControlLayout layout = ControlLayout::Uniform(cs.num_vehicles, 2);
  return RowMembership(EvaluateRows(cs, x), alpha, u, cs.maneuver->Stacked(),
                       layout, UniformPolytopes(cs.num_vehicles, bounds));
}

}  // namespace fwcbf
