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

#include "fwcbf/qp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fwcbf/error.h"

namespace fwcbf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void ValidateProblem(const QpProblem& problem) {
  const Eigen::Index m = problem.u_hat.size();
  const Eigen::Index r = problem.d_vector.size();
  if (m < 1) {
    throw Error(ErrorCode::kInvalidArgument, "QP needs at least one variable");
  }
  if (problem.g_matrix.rows() != r || (r > 0 && problem.g_matrix.cols() != m)) {
    throw Error(ErrorCode::kInvalidArgument,
                "QP constraint matrix is " +
                    std::to_string(problem.g_matrix.rows()) + "x" +
                    std::to_string(problem.g_matrix.cols()) + ", expected " +
                    std::to_string(r) + "x" + std::to_string(m));
  }
  if (!problem.u_hat.allFinite() || !problem.g_matrix.allFinite() ||
      !problem.d_vector.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "QP data must be finite");
  }
}

}  // namespace

void QpProblem::AddRow(const Eigen::RowVectorXd& g, double d) {
  const Eigen::Index r = d_vector.size();
  if (r == 0) g_matrix.resize(0, g.size());
  g_matrix.conservativeResize(r + 1, g.size());
  g_matrix.row(r) = g;
  d_vector.conservativeResize(r + 1);
  d_vector(r) = d;
}

double MaxViolation(const QpProblem& problem, const Eigen::VectorXd& u) {
  if (problem.num_constraints() == 0) return 0.0;
  const Eigen::VectorXd slack = problem.g_matrix * u - problem.d_vector;
  return std::max(0.0, -slack.minCoeff());
}

double KktResidual(const QpProblem& problem, const QpSolution& solution) {
  Eigen::VectorXd residual = solution.u_star - problem.u_hat;
  for (std::size_t a = 0; a < solution.active_set.size(); ++a) {
    residual -= solution.multipliers(static_cast<Eigen::Index>(a)) *
                problem.g_matrix.row(solution.active_set[a]).transpose();
  }
  return residual.lpNorm<Eigen::Infinity>();
}

QpSolution SolveQp(const QpProblem& problem, const QpTolerances& tol) {
  ValidateProblem(problem);
  const int m = problem.num_variables();
  const int r = problem.num_constraints();
  const Eigen::MatrixXd& g = problem.g_matrix;
  const Eigen::VectorXd& d = problem.d_vector;

  Eigen::VectorXd x = problem.u_hat;
  std::vector<int> active;
  std::vector<double> lambda;
  // Rows found numerically satisfied but linearly dependent on the active set.
  std::vector<bool> settled(r, false);
  std::vector<bool> in_active(r, false);
  int iterations = 0;
  const int max_iterations = 100 * std::max(r, 1);

  auto entry_threshold = [&](int i) {
    const double scale = g.row(i).lpNorm<1>() *
                             std::max(1.0, x.lpNorm<Eigen::Infinity>()) +
                         std::abs(d(i));
    return std::min(tol.entry * std::max(1.0, scale), 0.1 * tol.feasibility);
  };

  while (true) {
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < r; ++i) {
      if (in_active[i] || settled[i]) continue;
      const double slack = g.row(i).dot(x) - d(i);
      if (slack < -entry_threshold(i) && slack < worst) {
        worst = slack;
        p = i;
      }
    }
    if (p < 0) {
      // A settled row may have drifted while later rows entered.
      bool reopened = false;
      for (int i = 0; i < r; ++i) {
        if (settled[i] && g.row(i).dot(x) - d(i) < -0.1 * tol.feasibility) {
          std::fill(settled.begin(), settled.end(), false);
          reopened = true;
          break;
        }
      }
      if (!reopened) break;
      continue;
    }

    const Eigen::VectorXd n = g.row(p).transpose();
    double lambda_p = 0.0;
    while (true) {
      if (++iterations > max_iterations) {
        throw Error(ErrorCode::kIterationLimit,
                    "QP active-set iteration cap of " +
                        std::to_string(max_iterations) + " reached");
      }
      const auto na = static_cast<Eigen::Index>(active.size());
      Eigen::VectorXd dual_dir(na);
      Eigen::VectorXd z = n;
      if (na > 0) {
        Eigen::MatrixXd normals(m, na);
        for (Eigen::Index a = 0; a < na; ++a) {
          normals.col(a) = g.row(active[a]).transpose();
        }
        dual_dir = normals.colPivHouseholderQr().solve(n);
        z = n - normals * dual_dir;
      }

      double t1 = kInf;
      Eigen::Index drop = -1;
      for (Eigen::Index a = 0; a < na; ++a) {
        if (dual_dir(a) > 1e-14) {
          const double ratio = lambda[a] / dual_dir(a);
          if (ratio < t1) {
            t1 = ratio;
            drop = a;
          }
        }
      }
      const double slack_p = n.dot(x) - d(p);
      double t2 = kInf;
      if (z.norm() > tol.dependence * n.norm()) {
        t2 = -slack_p / z.squaredNorm();
      }
      const double t = std::min(t1, t2);

      if (t == kInf) {
        if (-slack_p <= 0.1 * tol.feasibility) {
          settled[p] = true;
          break;
        }
        throw Error(ErrorCode::kInfeasible,
                    "constraint row " + std::to_string(p) +
                        " cannot be satisfied together with the active rows "
                        "(violation " +
                        std::to_string(-slack_p) + ")");
      }

      for (Eigen::Index a = 0; a < na; ++a) lambda[a] -= t * dual_dir(a);
      lambda_p += t;
      if (t2 < kInf) x += t * z;

      if (t2 <= t1) {
        active.push_back(p);
        lambda.push_back(lambda_p);
        in_active[p] = true;
        break;
      }
      in_active[active[drop]] = false;
      active.erase(active.begin() + drop);
      lambda.erase(lambda.begin() + drop);
    }
  }

  QpSolution solution;
  solution.u_star = x;
  solution.active_set = active;
  solution.multipliers = Eigen::Map<const Eigen::VectorXd>(
      lambda.data(), static_cast<Eigen::Index>(lambda.size()));
  solution.iterations = iterations;
  return solution;
}

}  // namespace fwcbf
