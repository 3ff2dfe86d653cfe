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

#include "fwcbf/safety.h"

#include <cmath>
#include <string>

#include "fwcbf/error.h"

namespace fwcbf {

std::string_view SafetyKindName(SafetyKind kind) {
  switch (kind) {
    case SafetyKind::kEuclideanSq:
      return "euclidean_sq";
    case SafetyKind::kAdjustedSq:
      return "adjusted_sq";
    case SafetyKind::kAdjustedSqrt:
      return "adjusted_sqrt";
    case SafetyKind::kPlainSqrt:
      return "plain_sqrt";
  }
  return "unknown";
}

SafetyKind ParseSafetyKind(std::string_view name) {
  for (SafetyKind kind :
       {SafetyKind::kEuclideanSq, SafetyKind::kAdjustedSq,
        SafetyKind::kAdjustedSqrt, SafetyKind::kPlainSqrt}) {
    if (name == SafetyKindName(kind)) return kind;
  }
  if (name == "EuclideanSq") return SafetyKind::kEuclideanSq;
  if (name == "AdjustedSq") return SafetyKind::kAdjustedSq;
  if (name == "AdjustedSqrt") return SafetyKind::kAdjustedSqrt;
  if (name == "PlainSqrt") return SafetyKind::kPlainSqrt;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown safety kind '" + std::string(name) + "'");
}

bool IsSqrtKind(SafetyKind kind) {
  return kind == SafetyKind::kAdjustedSqrt || kind == SafetyKind::kPlainSqrt;
}

bool IsAdjustedKind(SafetyKind kind) {
  return kind == SafetyKind::kAdjustedSq || kind == SafetyKind::kAdjustedSqrt;
}

void SafetyFnSpec::Validate() const {
  if (i < 0 || j < 0 || i >= j) {
    throw Error(ErrorCode::kInvalidArgument,
                "safety pair needs 0 <= i < j, got (" + std::to_string(i) +
                    ", " + std::to_string(j) + ")");
  }
  if (!(d_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "D_s must be > 0");
  }
  if (IsAdjustedKind(kind) && !(delta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "adjusted safety functions need delta > 0");
  }
}

double PairDistanceSq(const StackedState& x, int i, int j) {
  const double dx = x[i].px - x[j].px;
  const double dy = x[i].py - x[j].py;
  return dx * dx + dy * dy;
}

double SafetyRadicand(const SafetyFnSpec& spec, const StackedState& x) {
  const double d = PairDistanceSq(x, spec.i, spec.j);
  if (IsAdjustedKind(spec.kind)) {
    return d - spec.delta + spec.delta * std::cos(x[spec.i].theta);
  }
  return d;
}

double Rho(const SafetyFnSpec& spec, const StackedState& x) {
  const double radicand = SafetyRadicand(spec, x);
  if (!IsSqrtKind(spec.kind)) return radicand - spec.d_s * spec.d_s;
  if (radicand < 0.0) {
    throw Error(ErrorCode::kNegativeRadicand,
                "safety radicand " + std::to_string(radicand) + " < 0");
  }
  return std::sqrt(radicand) - spec.d_s;
}

Eigen::VectorXd RhoGradient(const SafetyFnSpec& spec, const StackedState& x) {
  const double radicand = SafetyRadicand(spec, x);
  double scale = 1.0;
  if (IsSqrtKind(spec.kind)) {
    if (radicand < 0.0) {
      throw Error(ErrorCode::kNegativeRadicand,
                  "safety radicand " + std::to_string(radicand) + " < 0");
    }
    if (radicand == 0.0) {
      throw Error(ErrorCode::kDegenerateGradient,
                  "sqrt safety function is not differentiable at zero");
    }
    scale = 0.5 / std::sqrt(radicand);
  }
  const int i = spec.i;
  const int j = spec.j;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kStateDim * x.size());
  const double dx = x[i].px - x[j].px;
  const double dy = x[i].py - x[j].py;
  grad(3 * i) = 2.0 * dx * scale;
  grad(3 * i + 1) = 2.0 * dy * scale;
  grad(3 * j) = -2.0 * dx * scale;
  grad(3 * j + 1) = -2.0 * dy * scale;
  if (IsAdjustedKind(spec.kind)) {
    grad(3 * i + 2) = -spec.delta * std::sin(x[i].theta) * scale;
  }
  return grad;
}

}  // namespace fwcbf
