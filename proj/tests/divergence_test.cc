//
// Copyright 2026 The DP Audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpaudit/divergence.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dpaudit/error.h"
#include "dpaudit/rng.h"
#include "oracles.h"

namespace dpaudit {
namespace {

TEST(ApproxDpDivergence, Examples) {
  EXPECT_EQ(ApproxDpDivergence(std::vector{0.5, 0.5}, std::vector{0.5, 0.5},
                               0.0),
            0.0);
  for (double eps : {0.0, 0.5, 5.0}) {
    EXPECT_EQ(ApproxDpDivergence(std::vector{1.0, 0.0},
                                 std::vector{0.0, 1.0}, eps),
              1.0);
  }
  EXPECT_NEAR(ApproxDpDivergence(std::vector{0.6, 0.4},
                                 std::vector{0.3, 0.7}, 0.0),
              0.3, 1e-15);
}

TEST(ApproxDpDivergence, Errors) {
  EXPECT_THROW(ApproxDpDivergence(std::vector{1.0}, std::vector{0.5, 0.5},
                                  0.0),
               DimensionError);
  EXPECT_THROW(ApproxDpDivergence(std::vector{1.0}, std::vector{1.0}, -0.1),
               DomainError);
}

TEST(ApproxDpDivergence, NonIncreasingInEpsilon) {
  const auto p = Distribution::Zipf(30, 1.1);
  const auto q = Distribution::Uniform(30);
  double last = 2.0;
  for (int i = 0; i <= 40; ++i) {
    const double d = ApproxDpDivergence(p, q, i * 0.1);
    EXPECT_LE(d, last);
    EXPECT_GE(d, 0.0);
    last = d;
  }
}

TEST(Distribution, Constructors) {
  const auto z = Distribution::Zipf(4, -0.6);
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += z[i];
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_NEAR(z[1] / z[0], std::pow(2.0, 0.6), 1e-12);
  EXPECT_EQ(Distribution::Degenerate(3, 2)[2], 1.0);
  EXPECT_THROW(Distribution(std::vector<double>{0.5, 0.6}), DomainError);
  EXPECT_THROW(Distribution(std::vector<double>{1.5, -0.5}), DomainError);
}

TEST(IsEpsDeltaDp, Examples) {
  const auto u = Distribution::Uniform(4);
  EXPECT_TRUE(IsEpsDeltaDp(u, u, PrivacyPoint(0.0, 0.0)));
  const Distribution a(std::vector<double>{1.0, 0.0});
  const Distribution b(std::vector<double>{0.0, 1.0});
  EXPECT_FALSE(IsEpsDeltaDp(a, b, PrivacyPoint(5.0, 0.5)));
  // Both orders give 0.3 (0.6 - 0.3 and 0.7 - 0.4).
  const Distribution p(std::vector<double>{0.6, 0.4});
  const Distribution q(std::vector<double>{0.3, 0.7});
  const double forward = std::max(0.6 - 0.3, 0.0) + std::max(0.4 - 0.7, 0.0);
  const double backward = std::max(0.3 - 0.6, 0.0) + std::max(0.7 - 0.4, 0.0);
  EXPECT_EQ(IsEpsDeltaDp(p, q, PrivacyPoint(0.0, 0.3)),
            std::max(forward, backward) <= 0.3);
  EXPECT_TRUE(IsEpsDeltaDp(p, q, PrivacyPoint(0.0, 0.3)));
  EXPECT_FALSE(IsEpsDeltaDp(p, q, PrivacyPoint(0.0, 0.29)));
}

TEST(PrivacyPoint, Validates) {
  EXPECT_THROW(PrivacyPoint(-1.0, 0.0), DomainError);
  EXPECT_THROW(PrivacyPoint(0.0, 1.5), DomainError);
}

TEST(CertificateSet, Examples) {
  EXPECT_EQ(CertificateSet(std::vector{0.9, 0.1}, std::vector{0.1, 0.9}, 0.0),
            std::vector<std::size_t>{0});
  EXPECT_TRUE(
      CertificateSet(std::vector{0.2, 0.8}, std::vector{0.2, 0.8}, 0.0)
          .empty());
  EXPECT_EQ(CertificateSet(std::vector{0.5, 0.3, 0.2},
                           std::vector{0.1, 0.3, 0.6}, 0.4),
            std::vector<std::size_t>{0});
}

TEST(CertificateSet, OptimalAgainstAllSubsets) {
  RandomStream rng(99, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = 1 + trial % 12;
    std::vector<double> p(s), q(s);
    for (std::size_t i = 0; i < s; ++i) {
      p[i] = rng.NextUniform();
      q[i] = rng.NextUniform();
    }
    const double eps = 0.1 * (trial % 11);
    const auto set = CertificateSet(p, q, eps);
    const double margin = SetMargin(p, q, eps, set);
    EXPECT_NEAR(margin, testing::BruteForceBestMargin(p, q, eps), 1e-12);
    EXPECT_NEAR(margin, ApproxDpDivergence(p, q, eps), 1e-12);
  }
}

}  // namespace
}  // namespace dpaudit
