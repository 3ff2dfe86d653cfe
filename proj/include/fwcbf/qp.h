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

// Small dense QP: minimize 0.5 * ||u - u_hat||^2 subject to G u >= d.

#ifndef FWCBF_QP_H_
#define FWCBF_QP_H_

#include <vector>

#include <Eigen/Dense>

namespace fwcbf {

struct QpProblem {
  Eigen::VectorXd u_hat;
  Eigen::MatrixXd g_matrix;  // r x m
  Eigen::VectorXd d_vector;  // r

  int num_variables() const { return static_cast<int>(u_hat.size()); }
  int num_constraints() const { return static_cast<int>(d_vector.size()); }

  // Appends one row g . u >= d.
  void AddRow(const Eigen::RowVectorXd& g, double d);
};

struct QpSolution {
  Eigen::VectorXd u_star;
  std::vector<int> active_set;   // row indices, in order of entry
  Eigen::VectorXd multipliers;   // one per active row, >= 0
  int iterations = 0;
};

struct QpTolerances {
  // Rows are treated as violated below -entry * max(1, |g|).
  double entry = 1e-11;
  // Guaranteed bound on the returned violation, G u* >= d - feasibility.
  double feasibility = 1e-8;
  double kkt = 1e-9;
  // A candidate normal whose component outside the active span is below
  // this fraction of its norm is treated as linearly dependent.
  double dependence = 1e-10;
};

// Dual active-set method (Goldfarb-Idnani) specialized to the identity
// Hessian: starts at the unconstrained minimizer u_hat and adds the most
// violated row (lowest index on ties) until all rows hold, dropping rows
// whose multiplier would turn negative.
//
// Throws Error(kInfeasible) when the entering row is implied-violated by the
// active rows, i.e. no point satisfies all constraints, and
// Error(kIterationLimit) after 100 * r iterations.
QpSolution SolveQp(const QpProblem& problem, const QpTolerances& tol = {});

// max_i max(0, d_i - g_i . u).
double MaxViolation(const QpProblem& problem, const Eigen::VectorXd& u);

// Stationarity residual ||u - u_hat - G_A^T lambda||_inf of a solution.
double KktResidual(const QpProblem& problem, const QpSolution& solution);

}  // namespace fwcbf

#endif  // FWCBF_QP_H_
