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

// Pairwise safety functions rho. rho >= 0 means the pair is separated by at
// least the safety distance right now.

#ifndef FWCBF_SAFETY_H_
#define FWCBF_SAFETY_H_

#include <string_view>

#include <Eigen/Dense>

#include "fwcbf/dynamics.h"

namespace fwcbf {

enum class SafetyKind {
  kEuclideanSq,   // d - D_s^2
  kAdjustedSq,    // d - delta + delta cos(theta_i) - D_s^2
  kAdjustedSqrt,  // sqrt(d - delta + delta cos(theta_i)) - D_s
  kPlainSqrt,     // sqrt(d) - D_s
};

std::string_view SafetyKindName(SafetyKind kind);
// Accepts the names produced by SafetyKindName as well as snake_case
// spellings ("adjusted_sqrt"). Throws Error(kInvalidArgument) otherwise.
SafetyKind ParseSafetyKind(std::string_view name);

bool IsSqrtKind(SafetyKind kind);
bool IsAdjustedKind(SafetyKind kind);

// One pairwise constraint. The heading term of the adjusted variants uses the
// lower-indexed vehicle i.
struct SafetyFnSpec {
  SafetyKind kind = SafetyKind::kEuclideanSq;
  int i = 0;
  int j = 1;
  double d_s = 1.0;
  double delta = 0.0;  // m^2, adjusted variants only

  // Throws Error(kInvalidArgument) on i >= j, negative indices, d_s <= 0 or
  // delta <= 0 for an adjusted variant.
  void Validate() const;
};

double PairDistanceSq(const StackedState& x, int i, int j);

// Quantity under the square root for the sqrt variants (and the squared part
// of the squared variants): d - delta + delta cos(theta_i), or d.
double SafetyRadicand(const SafetyFnSpec& spec, const StackedState& x);

// Throws Error(kNegativeRadicand) for sqrt variants with a negative radicand.
double Rho(const SafetyFnSpec& spec, const StackedState& x);

// Length 3k. Throws kNegativeRadicand as Rho, and kDegenerateGradient for
// sqrt variants at a zero radicand.
Eigen::VectorXd RhoGradient(const SafetyFnSpec& spec, const StackedState& x);

}  // namespace fwcbf

#endif  // FWCBF_SAFETY_H_
