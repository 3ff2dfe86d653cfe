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

#include "verify/oracles.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fwcbf/error.h"

namespace fwcbf::verify {
namespace {

// Pose plus the sensitivity of the pose to its initial value.
struct Augmented {
  Eigen::Vector3d s;
  Eigen::Matrix3d phi = Eigen::Matrix3d::Identity();
};

Augmented Derivative(const Augmented& y, const ControlInput& u) {
  Augmented d;
  const double c = std::cos(y.s(2));
  const double sn = std::sin(y.s(2));
  d.s << u.v * c, u.v * sn, u.omega;
  d.phi.row(0) = -u.v * sn * y.phi.row(2);
  d.phi.row(1) = u.v * c * y.phi.row(2);
  d.phi.row(2).setZero();
  return d;
}

Augmented Axpy(const Augmented& y, double h, const Augmented& d) {
  return {y.s + h * d.s, y.phi + h * d.phi};
}

Augmented Rk4Step(const Augmented& y, const ControlInput& u, double h) {
  const Augmented k1 = Derivative(y, u);
  const Augmented k2 = Derivative(Axpy(y, h / 2, k1), u);
  const Augmented k3 = Derivative(Axpy(y, h / 2, k2), u);
  const Augmented k4 = Derivative(Axpy(y, h, k3), u);
  return {y.s + h / 6 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s),
          y.phi + h / 6 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi)};
}

Augmented Advance(Augmented y, const ControlInput& u, double span,
                  double max_step) {
  if (span <= 0.0) return y;
  const int n = std::max(1, static_cast<int>(std::ceil(span / max_step)));
  const double h = span / n;
  for (int s = 0; s < n; ++s) y = Rk4Step(y, u, h);
  return y;
}

struct PairSetup {
  SafetyKind kind;
  double d_s;
  double delta;
  ControlInput ua;
  ControlInput ub;
};

double Radicand(const PairSetup& p, const Augmented& a, const Augmented& b) {
  const double dx = a.s(0) - b.s(0);
  const double dy = a.s(1) - b.s(1);
  double r = dx * dx + dy * dy;
  if (IsAdjustedKind(p.kind)) r += -p.delta + p.delta * std::cos(a.s(2));
  return r;
}

double RadicandRate(const PairSetup& p, const Augmented& a,
                    const Augmented& b) {
  const double dx = a.s(0) - b.s(0);
  const double dy = a.s(1) - b.s(1);
  const double dvx = p.ua.v * std::cos(a.s(2)) - p.ub.v * std::cos(b.s(2));
  const double dvy = p.ua.v * std::sin(a.s(2)) - p.ub.v * std::sin(b.s(2));
  double rate = 2.0 * (dx * dvx + dy * dvy);
  if (IsAdjustedKind(p.kind)) {
    rate -= p.delta * std::sin(a.s(2)) * p.ua.omega;
  }
  return rate;
}

double ValueOf(const PairSetup& p, double radicand) {
  return IsSqrtKind(p.kind) ? std::sqrt(radicand) - p.d_s
                            : radicand - p.d_s * p.d_s;
}

Augmented Start(const VehicleState& v) {
  Augmented a;
  a.s << v.px, v.py, v.theta;
  return a;
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool AllBarriersValid(const ConstraintSet& cs, const StackedState& x) {
  try {
    for (const BarrierSpec& b : cs.barriers) {
      if (EvaluateBarrier(b, x).value < 0.0) return false;
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

StackedState Scaled(const StackedState& x, double s) {
  StackedState y = x;
  for (VehicleState& v : y.vehicles) {
    v.px *= s;
    v.py *= s;
  }
  return y;
}

}  // namespace

ControlBounds FixedWingBounds() {
  return {15.0, 25.0, 13.0 * kDegree};
}

double ManeuverSpeed() {
  const ControlBounds b = FixedWingBounds();
  return 0.9 * b.v_min + 0.1 * b.v_max;
}

double ManeuverOmega() { return 0.9 * FixedWingBounds().omega_max; }

double OracleRho(SafetyKind kind, double d_s, double delta,
                 const VehicleState& a, const VehicleState& b) {
  const PairSetup p{kind, d_s, delta, {}, {}};
  return ValueOf(p, Radicand(p, Start(a), Start(b)));
}

RolloutMinimum RolloutBarrier(const BarrierSpec& spec, const StackedState& x,
                              double step) {
  const EvadingManeuver& m = *spec.maneuver;
  const int i = spec.i();
  const int j = spec.j();
  const PairSetup p{spec.safety.kind, spec.safety.d_s, spec.safety.delta,
                    m.input(i), m.input(j)};
  const Augmented a0 = Start(x[i]);
  const Augmented b0 = Start(x[j]);

  double horizon = 0.0;
  double grid = step;
  double sub = step;  // largest RK4 step
  bool periodic = false;
  switch (m.kind()) {
    case ManeuverKind::kTurn:
      // Every minimizer has a copy at least two steps away from both ends.
      horizon = 2.0 * std::numbers::pi / std::abs(m.omega()) + 4.0 * step;
      periodic = true;
      break;
    case ManeuverKind::kStraight: {
      // Straight lines are integrated exactly by RK4, so the horizon can
      // grow until the separation is increasing.
      horizon = 10.0;
      while (horizon < 1e9) {
        const Augmented a = Advance(a0, p.ua, horizon, horizon);
        const Augmented b = Advance(b0, p.ub, horizon, horizon);
        if (RadicandRate(p, a, b) > 0.0) break;
        horizon *= 2.0;
      }
      grid = horizon / 4000.0;
      sub = grid;
      break;
    }
    case ManeuverKind::kMixed:
      horizon = m.search_horizon();
      break;
  }

  const int n = static_cast<int>(std::ceil(horizon / grid));
  std::vector<Augmented> as{a0};
  std::vector<Augmented> bs{b0};
  as.reserve(n + 1);
  bs.reserve(n + 1);
  int best = periodic ? -1 : 0;
  double best_r = periodic ? std::numeric_limits<double>::infinity()
                           : Radicand(p, a0, b0);
  for (int s = 1; s <= n; ++s) {
    as.push_back(Advance(as.back(), p.ua, grid, sub));
    bs.push_back(Advance(bs.back(), p.ub, grid, sub));
    const double r = Radicand(p, as.back(), bs.back());
    if (periodic && s == n) break;
    if (r < best_r) {
      best_r = r;
      best = s;
    }
  }

  // Bisection on the sign of d radicand / d tau inside the bracketing cells.
  const int lo_idx = std::max(0, best - 1);
  const int hi_idx = std::min(n, best + 1);
  auto at = [&](double tau) {
    const double span = tau - lo_idx * grid;
    return std::pair{Advance(as[lo_idx], p.ua, span, sub),
                     Advance(bs[lo_idx], p.ub, span, sub)};
  };
  double lo = lo_idx * grid;
  double hi = hi_idx * grid;
  double tau = best * grid;
  const auto [alo, blo] = at(lo);
  const auto [ahi, bhi] = at(hi);
  const double rate_lo = RadicandRate(p, alo, blo);
  const double rate_hi = RadicandRate(p, ahi, bhi);
  if (best == 0 && RadicandRate(p, a0, b0) >= 0.0) {
    tau = 0.0;
  } else if (rate_lo <= 0.0 && rate_hi >= 0.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto [am, bm] = at(mid);
      (RadicandRate(p, am, bm) < 0.0 ? lo : hi) = mid;
    }
    tau = 0.5 * (lo + hi);
  }

  const auto [a, b] = at(tau);
  const double radicand = Radicand(p, a, b);
  RolloutMinimum out;
  out.tau = tau;
  out.value = ValueOf(p, radicand);
  Eigen::Vector3d da;
  Eigen::Vector3d db;
  da << 2.0 * (a.s(0) - b.s(0)), 2.0 * (a.s(1) - b.s(1)), 0.0;
  db << -da(0), -da(1), 0.0;
  if (IsAdjustedKind(p.kind)) da(2) = -p.delta * std::sin(a.s(2));
  const double scale = IsSqrtKind(p.kind) ? 0.5 / std::sqrt(radicand) : 1.0;
  out.gradient.head<3>() = scale * (da.transpose() * a.phi).transpose();
  out.gradient.tail<3>() = scale * (db.transpose() * b.phi).transpose();
  return out;
}

Eigen::VectorXd VariationalGradient(const BarrierSpec& spec,
                                    const StackedState& x, double step) {
  const RolloutMinimum r = RolloutBarrier(spec, x, step);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(kStateDim * x.size());
  g.segment<3>(kStateDim * spec.i()) = r.gradient.head<3>();
  g.segment<3>(kStateDim * spec.j()) = r.gradient.tail<3>();
  return g;
}

Eigen::VectorXd FiniteDifferenceGradient(const BarrierSpec& spec,
                                         const StackedState& x,
                                         double step) {
  const Eigen::VectorXd flat = x.Flatten();
  Eigen::VectorXd g(flat.size());
  for (Eigen::Index c = 0; c < flat.size(); ++c) {
    Eigen::VectorXd plus = flat;
    Eigen::VectorXd minus = flat;
    plus(c) += step;
    minus(c) -= step;
    g(c) = (BarrierValue(spec, StackedState::FromFlat(plus)) -
            BarrierValue(spec, StackedState::FromFlat(minus))) /
           (2.0 * step);
  }
  return g;
}

std::optional<Eigen::VectorXd> ProjectionOracle(const QpProblem& problem,
                                                double feas_tol) {
  const int m = problem.num_variables();
  const int r = problem.num_constraints();
  const Eigen::MatrixXd& g = problem.g_matrix;
  const Eigen::VectorXd& d = problem.d_vector;
  std::optional<Eigen::VectorXd> best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> subset;

  auto consider = [&]() {
    Eigen::VectorXd u = problem.u_hat;
    if (!subset.empty()) {
      const int s = static_cast<int>(subset.size());
      Eigen::MatrixXd gs(s, m);
      Eigen::VectorXd ds(s);
      for (int a = 0; a < s; ++a) {
        gs.row(a) = g.row(subset[a]);
        ds(a) = d(subset[a]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gs * gs.transpose());
      lu.setThreshold(1e-10);
      if (lu.rank() < s) return;
      u += gs.transpose() * lu.solve(ds - gs * problem.u_hat);
    }
    const Eigen::VectorXd slack = g * u - d;
    for (int row = 0; row < r; ++row) {
      const double scale =
          1.0 + g.row(row).cwiseAbs().sum() * u.cwiseAbs().maxCoeff();
      if (slack(row) < -feas_tol * scale) return;
    }
    const double dist = (u - problem.u_hat).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = u;
    }
  };

  std::function<void(int)> recurse = [&](int next) {
    consider();
    if (static_cast<int>(subset.size()) == m) return;
    for (int row = next; row < r; ++row) {
      subset.push_back(row);
      recurse(row + 1);
      subset.pop_back();
    }
  };
  recurse(0);
  return best;
}

double GridProjectionDistance(const QpProblem& problem, double lo, double hi,
                              int points) {
  const int m = problem.num_variables();
  auto feasible = [&](const Eigen::VectorXd& u) {
    return ((problem.g_matrix * u - problem.d_vector).array() >= 0.0).all();
  };
  const double h = (hi - lo) / (points - 1);
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> idx(m, 0);
  Eigen::VectorXd u(m);
  while (true) {
    for (int c = 0; c < m; ++c) u(c) = lo + idx[c] * h;
    if (feasible(u)) {
      const double dist = (u - problem.u_hat).norm();
      if (dist < best_dist) {
        best_dist = dist;
        best = u;
      }
    }
    int c = 0;
    while (c < m && ++idx[c] == points) idx[c++] = 0;
    if (c == m) break;
  }
  if (!std::isfinite(best_dist)) return best_dist;
  for (double s = h; s > 1e-10; s *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int c = 0; c < m; ++c) {
        for (double sign : {-1.0, 1.0}) {
          Eigen::VectorXd trial = best;
          trial(c) += sign * s;
          const double dist = (trial - problem.u_hat).norm();
          if (dist < best_dist && feasible(trial)) {
            best = trial;
            best_dist = dist;
            improved = true;
          }
        }
      }
    }
  }
  return best_dist;
}

QpProblem RandomFeasibleQp(std::mt19937_64& rng, int m, int r) {
  std::normal_distribution<double> normal;
  std::bernoulli_distribution active(0.4);
  std::bernoulli_distribution copy(0.1);
  std::exponential_distribution<double> gap(1.0);
  QpProblem qp;
  Eigen::VectorXd u0(m);
  for (int c = 0; c < m; ++c) u0(c) = 2.0 * normal(rng);
  qp.u_hat = u0;
  for (int c = 0; c < m; ++c) qp.u_hat(c) += 3.0 * normal(rng);
  qp.g_matrix.resize(0, m);
  for (int row = 0; row < r; ++row) {
    Eigen::RowVectorXd g(m);
    if (row > 0 && copy(rng)) {
      g = Uniform(rng, 0.5, 2.0) * qp.g_matrix.row(row - 1);
    } else {
      for (int c = 0; c < m; ++c) g(c) = normal(rng);
    }
    const double s = active(rng) ? 0.0 : gap(rng);
    qp.AddRow(g, g.dot(u0) - s);
  }
  return qp;
}

InfeasibleQp RandomInfeasibleQp(std::mt19937_64& rng, int m, int r) {
  if (r < 2) throw std::invalid_argument("need at least two rows");
  std::normal_distribution<double> normal;
  const int support = std::uniform_int_distribution<int>(
      2, std::min(r, m + 1))(rng);
  Eigen::MatrixXd g(r, m);
  Eigen::VectorXd d(r);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(r);
  Eigen::RowVectorXd sum_g = Eigen::RowVectorXd::Zero(m);
  double sum_d = 0.0;
  for (int row = 0; row < support - 1; ++row) {
    for (int c = 0; c < m; ++c) g(row, c) = normal(rng);
    d(row) = normal(rng);
    y(row) = Uniform(rng, 0.5, 2.0);
    sum_g += y(row) * g.row(row);
    sum_d += y(row) * d(row);
  }
  const int last = support - 1;
  y(last) = Uniform(rng, 0.5, 2.0);
  g.row(last) = -sum_g / y(last);
  d(last) = (Uniform(rng, 0.1, 1.0) - sum_d) / y(last);
  for (int row = support; row < r; ++row) {
    for (int c = 0; c < m; ++c) g(row, c) = normal(rng);
    d(row) = normal(rng);
  }
  std::vector<int> perm(r);
  for (int row = 0; row < r; ++row) perm[row] = row;
  std::shuffle(perm.begin(), perm.end(), rng);
  InfeasibleQp out;
  out.problem.u_hat.resize(m);
  for (int c = 0; c < m; ++c) out.problem.u_hat(c) = 2.0 * normal(rng);
  out.problem.g_matrix.resize(0, m);
  out.certificate.resize(r);
  for (int row = 0; row < r; ++row) {
    out.problem.AddRow(g.row(perm[row]), d(perm[row]));
    out.certificate(row) = y(perm[row]);
  }
  return out;
}

bool IsFarkasCertificate(const QpProblem& problem, const Eigen::VectorXd& y,
                         double tol) {
  if ((y.array() < -tol).any()) return false;
  const double scale = 1.0 + problem.g_matrix.cwiseAbs().maxCoeff() *
                                 y.cwiseAbs().sum();
  if ((problem.g_matrix.transpose() * y).cwiseAbs().maxCoeff() > tol * scale) {
    return false;
  }
  return problem.d_vector.dot(y) > tol * scale;
}

std::shared_ptr<const EvadingManeuver> RandomSharedManeuver(
    std::mt19937_64& rng, int k, bool turn) {
  const double v = ManeuverSpeed();
  if (turn) {
    std::vector<double> sigma(k);
    for (double& s : sigma) s = Uniform(rng, 0.95, 1.5);
    const double omega =
        std::bernoulli_distribution(0.5)(rng) ? ManeuverOmega()
                                              : -ManeuverOmega();
    return std::make_shared<const EvadingManeuver>(
        EvadingManeuver::Turn(v, omega, std::move(sigma)));
  }
  std::vector<double> speeds(k);
  for (int l = 0; l < k; ++l) speeds[l] = (1.0 + 0.01 * (l + 1)) * v;
  return std::make_shared<const EvadingManeuver>(
      EvadingManeuver::Straight(std::move(speeds)));
}

StackedState RandomSafeState(std::mt19937_64& rng, const ConstraintSet& cs,
                             double spread, int max_tries) {
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    StackedState x;
    for (int l = 0; l < cs.num_vehicles; ++l) {
      x.vehicles.push_back({Uniform(rng, -spread, spread),
                            Uniform(rng, -spread, spread),
                            Uniform(rng, -std::numbers::pi, std::numbers::pi)});
    }
    if (!AllBarriersValid(cs, x)) continue;
    // Pull the configuration towards the origin until it is about to leave
    // the safe set, stopping after a random number of halvings.
    const int halvings = std::uniform_int_distribution<int>(0, 30)(rng);
    double safe = 1.0;
    double unsafe = 0.0;
    for (int it = 0; it < halvings; ++it) {
      const double mid = 0.5 * (safe + unsafe);
      (AllBarriersValid(cs, Scaled(x, mid)) ? safe : unsafe) = mid;
    }
    return Scaled(x, safe);
  }
  throw std::runtime_error("no safe state found");
}

WorkedContrast MakeWorkedContrast() {
  WorkedContrast w;
  BarrierRow row;
  row.h = 0.0;
  row.lie_f = 0.0;
  row.lie_g = Eigen::Vector2d(1.0, -1.0);
  row.zeta = {0, 1};
  w.rows = {row};
  w.gamma = Eigen::Vector2d(1.0, 1.0);
  w.u_hat = Eigen::Vector2d(0.0, 0.0);
  w.alpha = AlphaFunction{1.0};
  VehiclePolytope box;
  box.a.resize(2, 1);
  box.a << 1.0, -1.0;
  box.b = Eigen::Vector2d(-2.0, -2.0);
  w.polytopes = {box, box};
  return w;
}

}  // namespace fwcbf::verify
