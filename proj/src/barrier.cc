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

#include "fwcbf/barrier.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "fwcbf/error.h"

namespace fwcbf {
namespace {

using Complex = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Complex kJ{0.0, 1.0};

void CheckPair(const BarrierSpec& spec, const StackedState& x) {
  if (spec.maneuver == nullptr) {
    throw Error(ErrorCode::kInvalidManeuver, "barrier has no maneuver");
  }
  spec.safety.Validate();
  const int k = static_cast<int>(x.size());
  if (spec.j() >= k) {
    throw Error(ErrorCode::kInvalidArgument,
                "barrier pair index out of range for state of size " +
                    std::to_string(k));
  }
  if (spec.maneuver->num_vehicles() != k) {
    throw Error(ErrorCode::kInvalidManeuver,
                "maneuver covers " +
                    std::to_string(spec.maneuver->num_vehicles()) +
                    " vehicles, state has " + std::to_string(k));
  }
}

// Maps the minimum of the radicand (squared separation, possibly adjusted)
// to the barrier value for the configured safety kind.
double ValueFromRadicand(const SafetyFnSpec& safety, double radicand) {
  if (!IsSqrtKind(safety.kind)) return radicand - safety.d_s * safety.d_s;
  if (radicand < 0.0) {
    throw Error(ErrorCode::kNegativeRadicand,
                "minimum radicand " + std::to_string(radicand) +
                    " < 0; the pair leaves the closed form's validity region");
  }
  return std::sqrt(radicand) - safety.d_s;
}

// Chain factor d(value)/d(radicand).
double RadicandScale(const SafetyFnSpec& safety, double radicand) {
  if (!IsSqrtKind(safety.kind)) return 1.0;
  if (radicand < 0.0) {
    throw Error(ErrorCode::kNegativeRadicand,
                "minimum radicand " + std::to_string(radicand) + " < 0");
  }
  if (radicand == 0.0) {
    throw Error(ErrorCode::kDegenerateGradient,
                "sqrt barrier is not differentiable at a zero radicand");
  }
  return 0.5 / std::sqrt(radicand);
}

// Intermediate quantities of the Turn closed form for pair (i, j).
//
// With phi = omega * tau, R_l = s_l / omega and circle centers
// (b_l, c_l) = (px_l - R_l sin th_l, py_l + R_l cos th_l), the adjusted
// radicand along the maneuver is
//   A1 + Re(Z e^{j phi}),
// where A1 = db^2 + dc^2 + R_i^2 + R_j^2 - 2 R_i R_j cos(th_i - th_j) - delta
// and the phasor Z = db P + dc Q + delta e^{j th_i} collects the five
// sinusoids of frequency omega.
struct TurnTerms {
  double ri = 0.0;
  double rj = 0.0;
  double db = 0.0;
  double dc = 0.0;
  Complex ei;
  Complex ej;
  Complex p;
  Complex q;
  Complex z;
  double a1 = 0.0;
  double a2 = 0.0;
  double phi_star = 0.0;  // omega * tau_star
  double tau_star = 0.0;
};

TurnTerms ComputeTurnTerms(const BarrierSpec& spec, const StackedState& x) {
  const EvadingManeuver& m = *spec.maneuver;
  const VehicleState& si = x[spec.i()];
  const VehicleState& sj = x[spec.j()];
  const double omega = m.omega();
  const double delta = spec.safety.delta;

  TurnTerms t;
  t.ri = m.input(spec.i()).v / omega;
  t.rj = m.input(spec.j()).v / omega;
  t.db = si.px - sj.px - t.ri * std::sin(si.theta) + t.rj * std::sin(sj.theta);
  t.dc = si.py - sj.py + t.ri * std::cos(si.theta) - t.rj * std::cos(sj.theta);
  t.ei = std::polar(1.0, si.theta);
  t.ej = std::polar(1.0, sj.theta);
  // sin terms enter rotated by -pi/2, i.e. multiplied by -j.
  t.p = -2.0 * kJ * (t.ri * t.ei - t.rj * t.ej);
  t.q = -2.0 * (t.ri * t.ei - t.rj * t.ej);
  t.z = t.db * t.p + t.dc * t.q + delta * t.ei;
  t.a1 = t.db * t.db + t.dc * t.dc + t.ri * t.ri + t.rj * t.rj -
         2.0 * t.ri * t.rj * std::cos(si.theta - sj.theta) - delta;
  t.a2 = std::abs(t.z);

  // Minimum where phi + arg(Z) = pi (mod 2 pi), first tau >= 0.
  const double phase = std::arg(t.z);
  double target = omega > 0.0 ? std::numbers::pi - phase
                              : phase - std::numbers::pi;
  target = std::fmod(target, kTwoPi);
  if (target < 0.0) target += kTwoPi;
  t.tau_star = target / std::abs(omega);
  t.phi_star = omega * t.tau_star;
  return t;
}

struct StraightTerms {
  Eigen::Vector2d dp0;
  Eigen::Vector2d dw;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double tau_star = 0.0;
  double min_sq = 0.0;
};

StraightTerms ComputeStraightTerms(const BarrierSpec& spec,
                                   const StackedState& x,
                                   ErrorCode degenerate_code) {
  const EvadingManeuver& m = *spec.maneuver;
  const VehicleState& si = x[spec.i()];
  const VehicleState& sj = x[spec.j()];
  const double vi = m.input(spec.i()).v;
  const double vj = m.input(spec.j()).v;

  StraightTerms t;
  t.dp0 = {si.px - sj.px, si.py - sj.py};
  t.dw = {vi * std::cos(si.theta) - vj * std::cos(sj.theta),
          vi * std::sin(si.theta) - vj * std::sin(sj.theta)};
  if (t.dw.norm() < kUniqueMinimizerTol) {
    throw Error(degenerate_code,
                "pair (" + std::to_string(spec.i()) + ", " +
                    std::to_string(spec.j()) +
                    ") has identical velocity vectors under the maneuver");
  }
  t.a = t.dw.squaredNorm();
  t.b = 2.0 * t.dp0.dot(t.dw);
  t.c = t.dp0.squaredNorm();
  t.tau_star = std::max(0.0, -t.b / (2.0 * t.a));
  t.min_sq = (t.dp0 + t.tau_star * t.dw).squaredNorm();
  return t;
}

void RequireKind(const BarrierSpec& spec, ManeuverKind kind) {
  if (spec.maneuver->kind() != kind) {
    throw Error(ErrorCode::kInvalidManeuver,
                std::string("expected a ") +
                    std::string(ManeuverKindName(kind)) + " maneuver, got " +
                    std::string(ManeuverKindName(spec.maneuver->kind())));
  }
}

void RequireTurnSafety(const SafetyFnSpec& safety) {
  if (!IsAdjustedKind(safety.kind)) {
    throw Error(ErrorCode::kIncompatibleSafetyKind,
                "turn maneuver needs an adjusted safety function, got " +
                    std::string(SafetyKindName(safety.kind)));
  }
}

void RequireStraightSafety(const SafetyFnSpec& safety) {
  if (IsAdjustedKind(safety.kind)) {
    throw Error(ErrorCode::kIncompatibleSafetyKind,
                "straight maneuver needs euclidean_sq or plain_sqrt, got " +
                    std::string(SafetyKindName(safety.kind)));
  }
}

Eigen::VectorXd TurnGradient(const BarrierSpec& spec, const StackedState& x) {
  const TurnTerms t = ComputeTurnTerms(spec, x);
  if (t.a2 <= kUniqueMinimizerTol) {
    throw Error(ErrorCode::kNonUniqueMinimizer,
                "turn phasor amplitude vanishes; every tau is a minimizer");
  }
  const double scale = RadicandScale(spec.safety, t.a1 - t.a2);
  const VehicleState& si = x[spec.i()];
  const VehicleState& sj = x[spec.j()];
  const double delta = spec.safety.delta;
  // tau_star is held fixed: the value is stationary in phi at phi_star.
  const Complex rot = std::polar(1.0, t.phi_star);

  const double dbi = -t.ri * std::cos(si.theta);
  const double dci = -t.ri * std::sin(si.theta);
  const double dbj = t.rj * std::cos(sj.theta);
  const double dcj = t.rj * std::sin(sj.theta);
  const double cross = 2.0 * t.ri * t.rj * std::sin(si.theta - sj.theta);

  const double da1_thi = 2.0 * t.db * dbi + 2.0 * t.dc * dci + cross;
  const double da1_thj = 2.0 * t.db * dbj + 2.0 * t.dc * dcj - cross;
  const Complex dz_thi = dbi * t.p + t.db * (2.0 * t.ri * t.ei) + dci * t.q +
                         t.dc * (-2.0 * kJ * t.ri * t.ei) +
                         kJ * delta * t.ei;
  const Complex dz_thj = dbj * t.p + t.db * (-2.0 * t.rj * t.ej) + dcj * t.q +
                         t.dc * (2.0 * kJ * t.rj * t.ej);

  const double d_px = 2.0 * t.db + std::real(t.p * rot);
  const double d_py = 2.0 * t.dc + std::real(t.q * rot);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kStateDim * x.size());
  grad(3 * spec.i()) = scale * d_px;
  grad(3 * spec.i() + 1) = scale * d_py;
  grad(3 * spec.i() + 2) = scale * (da1_thi + std::real(dz_thi * rot));
  grad(3 * spec.j()) = -scale * d_px;
  grad(3 * spec.j() + 1) = -scale * d_py;
  grad(3 * spec.j() + 2) = scale * (da1_thj + std::real(dz_thj * rot));
  return grad;
}

Eigen::VectorXd StraightGradient(const BarrierSpec& spec,
                                 const StackedState& x) {
  const StraightTerms t =
      ComputeStraightTerms(spec, x, ErrorCode::kNonUniqueMinimizer);
  const double scale = RadicandScale(spec.safety, t.min_sq);
  const VehicleState& si = x[spec.i()];
  const VehicleState& sj = x[spec.j()];
  const double vi = spec.maneuver->input(spec.i()).v;
  const double vj = spec.maneuver->input(spec.j()).v;
  const Eigen::Vector2d sep = t.dp0 + t.tau_star * t.dw;
  const Eigen::Vector2d dw_dthi{-vi * std::sin(si.theta),
                                vi * std::cos(si.theta)};
  const Eigen::Vector2d dw_dthj{vj * std::sin(sj.theta),
                                -vj * std::cos(sj.theta)};

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kStateDim * x.size());
  grad(3 * spec.i()) = scale * 2.0 * sep.x();
  grad(3 * spec.i() + 1) = scale * 2.0 * sep.y();
  grad(3 * spec.i() + 2) = scale * 2.0 * t.tau_star * sep.dot(dw_dthi);
  grad(3 * spec.j()) = -scale * 2.0 * sep.x();
  grad(3 * spec.j() + 1) = -scale * 2.0 * sep.y();
  grad(3 * spec.j() + 2) = scale * 2.0 * t.tau_star * sep.dot(dw_dthj);
  return grad;
}

// Two-vehicle state holding the pair rolled out to time tau.
StackedState PairAt(const BarrierSpec& spec, const StackedState& x,
                    double tau) {
  const EvadingManeuver& m = *spec.maneuver;
  StackedState pair;
  pair.vehicles = {AnalyticArc(x[spec.i()], m.input(spec.i()), tau),
                   AnalyticArc(x[spec.j()], m.input(spec.j()), tau)};
  return pair;
}

SafetyFnSpec PairLocalSafety(const SafetyFnSpec& safety) {
  SafetyFnSpec local = safety;
  local.i = 0;
  local.j = 1;
  return local;
}

constexpr int kMixedGridCells = 20000;

Eigen::VectorXd MixedGradient(const BarrierSpec& spec, const StackedState& x) {
  const double horizon = spec.maneuver->search_horizon();
  const OracleResult min =
      NumericBarrierMinimum(spec, x, horizon, horizon / kMixedGridCells);
  const SafetyFnSpec local = PairLocalSafety(spec.safety);
  const StackedState pair = PairAt(spec, x, min.tau_star);
  const Eigen::VectorXd drho = RhoGradient(local, pair);
  const Eigen::Matrix3d ji = AnalyticArcJacobian(
      x[spec.i()], spec.maneuver->input(spec.i()), min.tau_star);
  const Eigen::Matrix3d jj = AnalyticArcJacobian(
      x[spec.j()], spec.maneuver->input(spec.j()), min.tau_star);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kStateDim * x.size());
  grad.segment<3>(3 * spec.i()) = ji.transpose() * drho.segment<3>(0);
  grad.segment<3>(3 * spec.j()) = jj.transpose() * drho.segment<3>(3);
  return grad;
}

}  // namespace

std::string_view ManeuverKindName(ManeuverKind kind) {
  switch (kind) {
    case ManeuverKind::kTurn:
      return "turn";
    case ManeuverKind::kStraight:
      return "straight";
    case ManeuverKind::kMixed:
      return "mixed";
  }
  return "unknown";
}

EvadingManeuver EvadingManeuver::Turn(double v, double omega,
                                      std::vector<double> sigma) {
  if (!std::isfinite(omega) || std::abs(omega) < kStraightLineOmega) {
    throw Error(ErrorCode::kInvalidManeuver, "turn maneuver needs omega != 0");
  }
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidManeuver, "turn maneuver needs v > 0");
  }
  if (sigma.empty()) {
    throw Error(ErrorCode::kInvalidManeuver, "turn maneuver has no vehicles");
  }
  EvadingManeuver m;
  m.kind_ = ManeuverKind::kTurn;
  m.base_speed_ = v;
  m.omega_ = omega;
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidManeuver,
                  "turn speed multipliers must be positive");
    }
    m.inputs_.push_back({s * v, omega});
  }
  m.sigma_ = std::move(sigma);
  return m;
}

EvadingManeuver EvadingManeuver::Straight(std::vector<double> speeds) {
  if (speeds.empty()) {
    throw Error(ErrorCode::kInvalidManeuver,
                "straight maneuver has no vehicles");
  }
  EvadingManeuver m;
  m.kind_ = ManeuverKind::kStraight;
  for (std::size_t a = 0; a < speeds.size(); ++a) {
    if (!(speeds[a] > 0.0) || !std::isfinite(speeds[a])) {
      throw Error(ErrorCode::kInvalidManeuver,
                  "straight maneuver speeds must be positive");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (speeds[a] == speeds[b]) {
        throw Error(ErrorCode::kInvalidManeuver,
                    "straight maneuver speeds must be pairwise distinct "
                    "(vehicles " +
                        std::to_string(b) + " and " + std::to_string(a) + ")");
      }
    }
    m.inputs_.push_back({speeds[a], 0.0});
  }
  return m;
}

EvadingManeuver EvadingManeuver::Mixed(std::vector<ControlInput> inputs,
                                       double horizon) {
  if (inputs.empty()) {
    throw Error(ErrorCode::kInvalidManeuver, "mixed maneuver has no vehicles");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kInvalidManeuver,
                "mixed maneuver needs a positive search horizon");
  }
  EvadingManeuver m;
  m.kind_ = ManeuverKind::kMixed;
  m.inputs_ = std::move(inputs);
  m.horizon_ = horizon;
  return m;
}

void EvadingManeuver::ValidateStrictlyInside(
    const ControlBounds& bounds) const {
  for (int l = 0; l < num_vehicles(); ++l) {
    if (!bounds.StrictlyContains(inputs_[l])) {
      throw Error(ErrorCode::kInvalidManeuver,
                  "maneuver input of vehicle " + std::to_string(l) +
                      " is not strictly inside the actuator limits");
    }
  }
}

BarrierEval TurnClosedForm(const BarrierSpec& spec, const StackedState& x) {
  CheckPair(spec, x);
  RequireKind(spec, ManeuverKind::kTurn);
  RequireTurnSafety(spec.safety);
  const TurnTerms t = ComputeTurnTerms(spec, x);
  BarrierEval eval;
  eval.value = ValueFromRadicand(spec.safety, t.a1 - t.a2);
  eval.tau_star = t.tau_star;
  return eval;
}

BarrierEval StraightClosedForm(const BarrierSpec& spec, const StackedState& x) {
  CheckPair(spec, x);
  RequireKind(spec, ManeuverKind::kStraight);
  RequireStraightSafety(spec.safety);
  const StraightTerms t =
      ComputeStraightTerms(spec, x, ErrorCode::kDegenerateRelativeMotion);
  BarrierEval eval;
  eval.value = ValueFromRadicand(spec.safety, t.min_sq);
  eval.tau_star = t.tau_star;
  return eval;
}

OracleResult NumericBarrierMinimum(const BarrierSpec& spec,
                                   const StackedState& x, double horizon,
                                   double grid_dt) {
  CheckPair(spec, x);
  if (!(horizon >= 0.0) || !(grid_dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "oracle needs horizon >= 0 and grid_dt > 0");
  }
  const SafetyFnSpec local = PairLocalSafety(spec.safety);
  auto rho_at = [&](double tau) { return Rho(local, PairAt(spec, x, tau)); };

  const auto cells = static_cast<long>(std::ceil(horizon / grid_dt));
  const double step = cells > 0 ? horizon / static_cast<double>(cells) : 0.0;
  long best = 0;
  double best_value = rho_at(0.0);
  for (long n = 1; n <= cells; ++n) {
    const double value = rho_at(static_cast<double>(n) * step);
    if (value < best_value) {
      best_value = value;
      best = n;
    }
  }
  OracleResult result{best_value, static_cast<double>(best) * step};
  if (cells == 0) return result;

  // Golden-section refinement on the two cells around the grid minimum.
  double lo = static_cast<double>(std::max(best - 1, 0L)) * step;
  double hi = static_cast<double>(std::min(best + 1, cells)) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = rho_at(c);
  double fd = rho_at(d);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi);
       ++iter) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = rho_at(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = rho_at(d);
    }
  }
  const double tau = 0.5 * (lo + hi);
  const double value = rho_at(tau);
  if (value < result.value) result = {value, tau};
  return result;
}

Eigen::VectorXd BarrierGradient(const BarrierSpec& spec,
                                const StackedState& x) {
  CheckPair(spec, x);
  switch (spec.maneuver->kind()) {
    case ManeuverKind::kTurn:
      RequireTurnSafety(spec.safety);
      return TurnGradient(spec, x);
    case ManeuverKind::kStraight:
      RequireStraightSafety(spec.safety);
      return StraightGradient(spec, x);
    case ManeuverKind::kMixed:
      return MixedGradient(spec, x);
  }
  throw Error(ErrorCode::kInvalidManeuver, "unknown maneuver kind");
}

LieDerivatives ComputeLieDerivatives(const Eigen::VectorXd& gradient,
                                     const StackedState& x) {
  const auto k = static_cast<Eigen::Index>(x.size());
  if (gradient.size() != kStateDim * k) {
    throw Error(ErrorCode::kInvalidArgument,
                "gradient length does not match the state");
  }
  LieDerivatives lie;
  // The unicycle has no drift, so L_f h = grad . 0.
  lie.lie_f = gradient.dot(Eigen::VectorXd::Zero(kStateDim * k));
  lie.lie_g = Eigen::VectorXd::Zero(kControlDim * k);
  for (Eigen::Index l = 0; l < k; ++l) {
    const double th = x[l].theta;
    lie.lie_g(2 * l) =
        gradient(3 * l) * std::cos(th) + gradient(3 * l + 1) * std::sin(th);
    lie.lie_g(2 * l + 1) = gradient(3 * l + 2);
  }
  return lie;
}

double BarrierValue(const BarrierSpec& spec, const StackedState& x) {
  CheckPair(spec, x);
  switch (spec.maneuver->kind()) {
    case ManeuverKind::kTurn:
      return TurnClosedForm(spec, x).value;
    case ManeuverKind::kStraight:
      return StraightClosedForm(spec, x).value;
    case ManeuverKind::kMixed: {
      const double horizon = spec.maneuver->search_horizon();
      return NumericBarrierMinimum(spec, x, horizon, horizon / kMixedGridCells)
          .value;
    }
  }
  return 0.0;
}

BarrierEval EvaluateBarrier(const BarrierSpec& spec, const StackedState& x) {
  CheckPair(spec, x);
  BarrierEval eval;
  switch (spec.maneuver->kind()) {
    case ManeuverKind::kTurn:
      eval = TurnClosedForm(spec, x);
      break;
    case ManeuverKind::kStraight:
      eval = StraightClosedForm(spec, x);
      break;
    case ManeuverKind::kMixed: {
      const double horizon = spec.maneuver->search_horizon();
      const OracleResult min =
          NumericBarrierMinimum(spec, x, horizon, horizon / kMixedGridCells);
      eval.value = min.value;
      eval.tau_star = min.tau_star;
      break;
    }
  }
  eval.gradient = BarrierGradient(spec, x);
  LieDerivatives lie = ComputeLieDerivatives(eval.gradient, x);
  eval.lie_f = lie.lie_f;
  eval.lie_g = std::move(lie.lie_g);
  return eval;
}

LieDerivatives RhoLieDerivatives(const SafetyFnSpec& spec,
                                 const StackedState& x) {
  spec.Validate();
  return ComputeLieDerivatives(RhoGradient(spec, x), x);
}

}  // namespace fwcbf
