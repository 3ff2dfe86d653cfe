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
#include <numbers>
#include <random>

#include "fwcbf/error.h"
#include "gtest/gtest.h"

namespace fwcbf {
namespace {

constexpr double kPi = std::numbers::pi;

StackedState Pair(VehicleState a, VehicleState b) { return {{a, b}}; }

StackedState RandomState(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> pos(-100, 100), ang(-kPi, kPi);
  StackedState x;
  for (int l = 0; l < k; ++l) x.vehicles.push_back({pos(rng), pos(rng), ang(rng)});
  return x;
}

TEST(PairDistanceSq, ThreeFourFive) {
  const StackedState x = Pair({0, 0, 0}, {3, 4, 1});
  EXPECT_DOUBLE_EQ(PairDistanceSq(x, 0, 1), 25.0);
  EXPECT_DOUBLE_EQ(PairDistanceSq(x, 1, 0), 25.0);
  EXPECT_DOUBLE_EQ(PairDistanceSq(Pair({2, 2, 0}, {2, 2, 1}), 0, 1), 0.0);
}

TEST(Rho, EuclideanSq) {
  const SafetyFnSpec s{SafetyKind::kEuclideanSq, 0, 1, 5, 0};
  EXPECT_DOUBLE_EQ(Rho(s, Pair({0, 0, 0}, {10, 0, 0})), 75.0);
}

TEST(Rho, AdjustedSqAtZeroHeadingMatchesEuclidean) {
  const SafetyFnSpec adj{SafetyKind::kAdjustedSq, 0, 1, 5, 0.01};
  const SafetyFnSpec euc{SafetyKind::kEuclideanSq, 0, 1, 5, 0};
  const StackedState x = Pair({0, 0, 0}, {7, 2, 2.0});
  EXPECT_DOUBLE_EQ(Rho(adj, x), Rho(euc, x));
}

TEST(Rho, AdjustedSqHeadingPi) {
  const SafetyFnSpec adj{SafetyKind::kAdjustedSq, 0, 1, 5, 0.01};
  EXPECT_NEAR(Rho(adj, Pair({0, 0, kPi}, {10, 0, 0})), 74.98, 1e-12);
}

TEST(Rho, UsesLowerIndexedHeading) {
  const SafetyFnSpec adj{SafetyKind::kAdjustedSq, 1, 2, 1, 0.5};
  const StackedState x{{{0, 0, kPi}, {0, 0, 0}, {2, 0, kPi}}};
  EXPECT_DOUBLE_EQ(Rho(adj, x), 4.0 - 1.0);
}

TEST(Rho, SqrtVariants) {
  const SafetyFnSpec plain{SafetyKind::kPlainSqrt, 0, 1, 5, 0};
  EXPECT_DOUBLE_EQ(Rho(plain, Pair({0, 0, 0}, {3, 4, 0})), 0.0);
  const SafetyFnSpec adj{SafetyKind::kAdjustedSqrt, 0, 1, 5, 0.01};
  EXPECT_NEAR(Rho(adj, Pair({0, 0, kPi}, {10, 0, 0})),
              std::sqrt(100 - 0.02) - 5, 1e-12);
}

TEST(Rho, NegativeRadicandThrows) {
  const SafetyFnSpec adj{SafetyKind::kAdjustedSqrt, 0, 1, 5, 0.01};
  try {
    Rho(adj, Pair({0, 0, kPi}, {0, 0, 0}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeRadicand);
  }
}

TEST(RhoGradient, ZeroRadicandIsDegenerate) {
  const SafetyFnSpec plain{SafetyKind::kPlainSqrt, 0, 1, 5, 0};
  try {
    RhoGradient(plain, Pair({1, 1, 0}, {1, 1, 0}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateGradient);
  }
}

TEST(SafetyFnSpec, Validation) {
  EXPECT_THROW((SafetyFnSpec{SafetyKind::kEuclideanSq, 1, 1, 5, 0}.Validate()),
               Error);
  EXPECT_THROW((SafetyFnSpec{SafetyKind::kEuclideanSq, 0, 1, 0, 0}.Validate()),
               Error);
  EXPECT_THROW((SafetyFnSpec{SafetyKind::kAdjustedSq, 0, 1, 5, 0}.Validate()),
               Error);
  EXPECT_NO_THROW(
      (SafetyFnSpec{SafetyKind::kAdjustedSq, 0, 1, 5, 0.01}.Validate()));
}

TEST(SafetyKind, NamesRoundTrip) {
  for (SafetyKind k : {SafetyKind::kEuclideanSq, SafetyKind::kAdjustedSq,
                       SafetyKind::kAdjustedSqrt, SafetyKind::kPlainSqrt}) {
    EXPECT_EQ(ParseSafetyKind(SafetyKindName(k)), k);
  }
  EXPECT_THROW(ParseSafetyKind("cubic"), Error);
}

TEST(RhoGradient, EuclideanPolynomial) {
  const SafetyFnSpec s{SafetyKind::kEuclideanSq, 0, 1, 5, 0};
  const StackedState x = Pair({1, 2, 0.3}, {4, -2, 1});
  const Eigen::VectorXd g = RhoGradient(s, x);
  EXPECT_DOUBLE_EQ(g(0), 2 * (1 - 4));
  EXPECT_DOUBLE_EQ(g(1), 2 * (2 + 2));
  EXPECT_DOUBLE_EQ(g(2), 0.0);
  EXPECT_DOUBLE_EQ(g(3), -g(0));
}

TEST(RhoGradient, AdjustedHeadingTerm) {
  const SafetyFnSpec s{SafetyKind::kAdjustedSq, 0, 1, 5, 0.01};
  const StackedState x = Pair({1, 2, 0.3}, {4, -2, 1});
  EXPECT_NEAR(RhoGradient(s, x)(2), -0.01 * std::sin(0.3), 1e-15);
  EXPECT_EQ(RhoGradient(s, x)(5), 0.0);
}

TEST(RhoGradient, SparseInThreeVehicleState) {
  const SafetyFnSpec s{SafetyKind::kAdjustedSqrt, 0, 2, 5, 0.01};
  std::mt19937_64 rng(4);
  const Eigen::VectorXd g = RhoGradient(s, RandomState(rng, 3));
  EXPECT_EQ(g.segment<3>(3).norm(), 0.0);
}

TEST(RhoGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const SafetyKind kinds[] = {SafetyKind::kEuclideanSq, SafetyKind::kAdjustedSq,
                              SafetyKind::kAdjustedSqrt,
                              SafetyKind::kPlainSqrt};
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const SafetyFnSpec s{kinds[n % 4], 0, 1, 5, 0.01};
    const StackedState x = RandomState(rng, 2);
    const Eigen::VectorXd g = RhoGradient(s, x);
    Eigen::VectorXd fd(6);
    const Eigen::VectorXd flat = x.Flatten();
    for (int c = 0; c < 6; ++c) {
      Eigen::VectorXd p = flat, m = flat;
      p(c) += 1e-6;
      m(c) -= 1e-6;
      fd(c) = (Rho(s, StackedState::FromFlat(p)) -
               Rho(s, StackedState::FromFlat(m))) / 2e-6;
    }
    worst = std::max(worst, (g - fd).norm() / g.norm());
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Rho, AdjustmentIsBounded) {
  std::mt19937_64 rng(6);
  const SafetyFnSpec adj{SafetyKind::kAdjustedSq, 0, 1, 5, 0.01};
  const SafetyFnSpec euc{SafetyKind::kEuclideanSq, 0, 1, 5, 0};
  for (int n = 0; n < 1000; ++n) {
    const StackedState x = RandomState(rng, 2);
    EXPECT_LE(std::abs(Rho(adj, x) - Rho(euc, x)), 2 * 0.01 + 1e-12);
  }
}

TEST(Rho, EuclideanSignMatchesDistance) {
  std::mt19937_64 rng(7);
  const SafetyFnSpec euc{SafetyKind::kEuclideanSq, 0, 1, 60, 0};
  for (int n = 0; n < 1000; ++n) {
    const StackedState x = RandomState(rng, 2);
    EXPECT_EQ(Rho(euc, x) >= 0, std::sqrt(PairDistanceSq(x, 0, 1)) >= 60);
  }
}

TEST(Rho, TranslationInvariant) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> shift(-1000, 1000);
  const SafetyKind kinds[] = {SafetyKind::kEuclideanSq, SafetyKind::kAdjustedSq,
                              SafetyKind::kAdjustedSqrt,
                              SafetyKind::kPlainSqrt};
  for (int n = 0; n < 100; ++n) {
    const SafetyFnSpec s{kinds[n % 4], 0, 1, 5, 0.01};
    StackedState x = RandomState(rng, 2);
    const double before = Rho(s, x);
    const double dx = shift(rng), dy = shift(rng);
    for (auto& v : x.vehicles) {
      v.px += dx;
      v.py += dy;
    }
    EXPECT_NEAR(Rho(s, x), before, 1e-9 * std::max(1.0, std::abs(before)));
  }
}

}  // namespace
}  // namespace fwcbf
