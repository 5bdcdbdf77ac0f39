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

#include "dpaudit/poly.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dpaudit/error.h"
#include "oracles.h"

namespace dpaudit {
namespace {

int CountAlternations(const UniPolyApprox& r, double slack) {
  return testing::CountAlternations(
      [&](double t) { return std::abs(t) - r.Evaluate(t); }, -1.0, 1.0,
      r.sup_error, slack);
}

TEST(RemezAbs, DegreeOneIsConstantHalf) {
  const auto r = RemezAbs(1);
  EXPECT_NEAR(r.sup_error, 0.5, 1e-12);
  EXPECT_NEAR(r.coeffs[0], 0.5, 1e-12);
  EXPECT_NEAR(r.coeffs[1], 0.0, 1e-12);
}

TEST(RemezAbs, DegreeTwo) {
  const auto r = RemezAbs(2);
  EXPECT_NEAR(r.sup_error, 0.125, 1e-12);
  EXPECT_NEAR(r.coeffs[0], 0.125, 1e-12);
  EXPECT_NEAR(r.coeffs[1], 0.0, 1e-12);
  EXPECT_NEAR(r.coeffs[2], 1.0, 1e-12);
}

TEST(RemezAbs, MatchesIndependentLawsonSolver) {
  for (int k : {4, 6, 10}) {
    const double lawson = testing::LawsonAbsError(k);
    EXPECT_NEAR(RemezAbs(k).sup_error, lawson, 2e-3 * lawson) << "K=" << k;
  }
}

TEST(RemezAbs, BernsteinConstant) {
  for (int k : {20, 40, 60}) {
    const double ks = k * RemezAbs(k).sup_error;
    EXPECT_NEAR(ks, 0.2802, 0.15 * 0.2802) << "K=" << k;
  }
}

TEST(RemezAbs, Equioscillates) {
  for (int k : {4, 10, 17, 40, 60}) {
    const auto r = RemezAbs(k);
    EXPECT_GE(CountAlternations(r, 1e-6), k + 2) << "K=" << k;
  }
}

TEST(RemezAbs, EvenAndBoundedBySupError) {
  const auto r = RemezAbs(13);
  for (int i = 0; i <= 10000; ++i) {
    const double t = -1.0 + 2.0 * i / 10000;
    EXPECT_NEAR(r.Evaluate(t), r.Evaluate(-t), 1e-12);
    EXPECT_LE(std::abs(std::abs(t) - r.Evaluate(t)), r.sup_error + 1e-9);
    EXPECT_NEAR(r.Evaluate(t), r.EvaluateMonomial(t), 1e-10);
  }
  for (int j = 1; j <= 13; j += 2) EXPECT_EQ(r.coeffs[j], 0.0);
}

TEST(RemezAbs, RefusesUnstableDegree) {
  EXPECT_THROW(RemezAbs(kMaxDegree + 1), DomainError);
}

TEST(Remez, ReproducesPolynomialExactly) {
  const auto r = Remez([](double x) { return 1.0 + x - 2.0 * x * x * x; }, 3,
                       -2.0, 1.0);
  EXPECT_LT(r.sup_error, 1e-12);
  EXPECT_NEAR(r.EvaluateMonomial(0.5), 1.0 + 0.5 - 0.25, 1e-11);
}

TEST(Remez, ExpOnInterval) {
  // Best line for e^x on [0, 1]: slope e - 1, touching at x0 = ln(e - 1),
  // error (1 - m + m x0) / 2.
  const auto r = Remez([](double x) { return std::exp(x); }, 1, 0.0, 1.0);
  const double m = std::exp(1.0) - 1.0;
  const double x0 = std::log(m);
  EXPECT_NEAR(r.coeffs[1], m, 1e-9);
  EXPECT_NEAR(r.coeffs[0], 1.0 - 0.5 * (1.0 - m + m * x0), 1e-9);
  EXPECT_NEAR(r.sup_error, 0.5 * (1.0 - m + m * x0), 1e-9);
}

TEST(ShiftedRelu, KinkAtZeroIsZeroFunction) {
  const auto h = ShiftedReluApprox(0.0, 8);
  EXPECT_LE(h.sup_error, 1e-12);
  for (int i = 0; i <= 100; ++i) {
    EXPECT_NEAR(h.EvaluateMonomial(i / 100.0), 0.0, 1e-12);
  }
}

TEST(ShiftedRelu, KinkAtOneIsAffine) {
  const auto h = ShiftedReluApprox(1.0, 5);
  EXPECT_LE(h.sup_error, 1e-12);
  EXPECT_NEAR(h.EvaluateMonomial(0.25), 0.75, 1e-12);
}

TEST(ShiftedRelu, QuadraticAtHalf) {
  // |y - 1/2| = |t| / 2 with t = 2y - 1, so the best quadratic is off by
  // 1/16; the relu takes half of that.
  const auto h = ShiftedReluApprox(0.5, 2);
  EXPECT_NEAR(h.sup_error, 1.0 / 32.0, 1e-12);
  for (int i = 0; i <= 1000; ++i) {
    const double y = i / 1000.0;
    EXPECT_LE(std::abs(std::max(0.5 - y, 0.0) - h.EvaluateMonomial(y)),
              1.0 / 32.0 + 1e-9);
  }
}

TEST(ShiftedRelu, ErrorShrinksNearTheEnds) {
  const int k = 10;
  for (double b : {0.001, 0.01, 0.1, 0.3, 0.5, 0.9, 0.999}) {
    const double scale = std::min({b, std::sqrt(b * (1 - b)) / k, 1 - b});
    EXPECT_LE(ShiftedReluApprox(b, k).sup_error, 0.5 * scale) << "b=" << b;
  }
}

TEST(ShiftedRelu, RejectsKinkOutsideUnitInterval) {
  EXPECT_THROW(ShiftedReluApprox(-0.1, 4), DomainError);
  EXPECT_THROW(ShiftedReluApprox(1.1, 4), DomainError);
}

TEST(ChebToMonomial, Identity) {
  // T_2(s) with s = 2x - 1 on [0, 1]: 2 (2x-1)^2 - 1 = 8x^2 - 8x + 1.
  const std::vector<double> cheb{0.0, 0.0, 1.0};
  const auto m = ChebyshevToMonomial(cheb, 0.0, 1.0);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(m[1], -8.0);
  EXPECT_DOUBLE_EQ(m[2], 8.0);
}

double SqrtSum(double x, double y) { return std::sqrt(x) + std::sqrt(y); }
double ReluSqrtDiff(double x, double y) {
  return std::max(std::sqrt(x) - std::sqrt(y), 0.0);
}

TEST(Bivariate, CornerAndDiagonal) {
  const auto u = ChebBivariate(BivariateTarget::kSqrtSum, 12);
  EXPECT_LE(std::abs(u.Evaluate(1.0, 1.0) - 2.0), u.sup_error);
  const auto v = ChebBivariate(BivariateTarget::kReluSqrtDiff, 12);
  for (int i = 0; i <= 256; ++i) {
    const double x = i / 256.0;
    EXPECT_LE(std::abs(v.Evaluate(x, x)), v.sup_error + 1e-12);
  }
}

TEST(Bivariate, OneOverKDecay) {
  for (auto target : {BivariateTarget::kSqrtSum,
                      BivariateTarget::kReluSqrtDiff}) {
    const auto f = target == BivariateTarget::kSqrtSum ? SqrtSum
                                                        : ReluSqrtDiff;
    const auto a = ChebBivariate(target, 20);
    const auto b = ChebBivariate(target, 40);
    const double ratio = BivariateSupError(a, f, 512) /
                         BivariateSupError(b, f, 512);
    EXPECT_GE(ratio, 1.6) << BivariateTargetId(target);
    EXPECT_LE(ratio, 2.6) << BivariateTargetId(target);
  }
}

TEST(Bivariate, RecordedErrorHoldsOnAnotherGrid) {
  for (auto target : {BivariateTarget::kSqrtSum,
                      BivariateTarget::kReluSqrtDiff}) {
    const auto f = target == BivariateTarget::kSqrtSum ? SqrtSum
                                                        : ReluSqrtDiff;
    const auto a = ChebBivariate(target, 10);
    for (int i = 0; i < 100; ++i) {
      for (int j = 0; j < 100; ++j) {
        const double x = (i + 0.5) / 100, y = (j + 0.5) / 100;
        EXPECT_LE(std::abs(a.Evaluate(x, y) - f(x, y)), a.sup_error + 1e-9);
      }
    }
  }
}

TEST(Bivariate, MonomialAgreesWithChebyshev) {
  const auto u = ChebBivariate(BivariateTarget::kSqrtSum, 10);
  for (double x : {0.0, 0.1, 0.5, 0.93}) {
    for (double y : {0.0, 0.2, 0.77, 1.0}) {
      EXPECT_NEAR(u.Evaluate(x, y), u.EvaluateMonomial(x, y), 1e-8);
    }
  }
}

TEST(Bivariate, UnknownTarget) {
  EXPECT_THROW(ParseBivariateTarget("sqrt_diff"), DomainError);
  EXPECT_EQ(ParseBivariateTarget("sqrt_sum"), BivariateTarget::kSqrtSum);
  EXPECT_THROW(ChebBivariate(BivariateTarget::kSqrtSum, 0), DomainError);
}

TEST(H2K, ZeroAtOriginAndDegreeBound) {
  const int k = 8;
  const auto u = ChebBivariate(BivariateTarget::kSqrtSum, k);
  const auto v = ChebBivariate(BivariateTarget::kReluSqrtDiff, k);
  const auto h = H2K(u, v);
  EXPECT_EQ(h.degree, 2 * k);
  EXPECT_EQ(h.coeff(0, 0), 0.0);
  EXPECT_EQ(h.EvaluateMonomial(0.0, 0.0), 0.0);
  EXPECT_NEAR(h.Evaluate(0.0, 0.0), 0.0, 1e-14);
  for (double x : {0.05, 0.3, 0.8}) {
    for (double y : {0.0, 0.4, 0.9}) {
      EXPECT_NEAR(h.Evaluate(x, y),
                  u.Evaluate(x, y) * v.Evaluate(x, y) -
                      u.Evaluate(0, 0) * v.Evaluate(0, 0),
                  1e-12);
    }
  }
}

TEST(H2K, ApproximatesReluDifference) {
  // u v ~ (sqrt x + sqrt y)[sqrt x - sqrt y]^+ = [x - y]^+.
  for (int k : {6, 12}) {
    const auto h = H2K(ChebBivariate(BivariateTarget::kSqrtSum, k),
                       ChebBivariate(BivariateTarget::kReluSqrtDiff, k));
    double worst = 0.0;
    for (int i = 0; i <= 64; ++i) {
      for (int j = 0; j <= 64; ++j) {
        const double x = i / 64.0, y = j / 64.0;
        const double bound = (std::sqrt(x) + std::sqrt(y)) / k + 1.0 / k / k;
        worst = std::max(worst,
                         std::abs(h.Evaluate(x, y) - std::max(x - y, 0.0)) /
                             bound);
      }
    }
    // Measured constant; 2 leaves room.
    EXPECT_LE(worst, 2.0) << "K=" << k;
  }
}

class CacheFile : public ::testing::Test {
 protected:
  void SetUp() override {
    path_ = std::filesystem::temp_directory_path() /
            ("dpaudit_cache_" + std::to_string(::testing::UnitTest::
                                                   GetInstance()
                                                       ->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()
                       ->current_test_info()
                       ->name());
    std::filesystem::remove(path_);
  }
  void TearDown() override { std::filesystem::remove(path_); }

  static std::string Slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::filesystem::path path_;
};

TEST_F(CacheFile, RoundTripIsBitExact) {
  {
    CoeffCache cache(path_);
    EXPECT_TRUE(cache.Populate(7));
  }
  CoeffCache fresh;
  CoeffCache loaded(path_);
  for (auto [a, b] : {std::pair{fresh.Abs(7), loaded.Abs(7)}}) {
    EXPECT_EQ(a->coeffs, b->coeffs);
    EXPECT_EQ(a->cheb, b->cheb);
    EXPECT_EQ(a->sup_error, b->sup_error);
  }
  for (auto t : {BivariateTarget::kSqrtSum, BivariateTarget::kReluSqrtDiff}) {
    EXPECT_EQ(fresh.Bivariate(t, 7)->coeffs, loaded.Bivariate(t, 7)->coeffs);
    EXPECT_EQ(fresh.Bivariate(t, 7)->cheb, loaded.Bivariate(t, 7)->cheb);
  }
  EXPECT_EQ(fresh.H(7)->coeffs, loaded.H(7)->coeffs);
}

TEST_F(CacheFile, RepopulateIsNoOp) {
  {
    CoeffCache cache(path_);
    cache.Populate(5);
  }
  const std::string before = Slurp(path_);
  CoeffCache again(path_);
  EXPECT_FALSE(again.Populate(5));
  EXPECT_EQ(Slurp(path_), before);
}

TEST_F(CacheFile, VersionMismatchRegenerates) {
  {
    std::ofstream out(path_);
    out << "polycache v0\nabs,5,0,123\n";
  }
  CoeffCache cache(path_);
  EXPECT_NEAR(cache.Abs(2)->sup_error, 0.125, 1e-12);
  EXPECT_TRUE(cache.Populate(2));
  EXPECT_EQ(Slurp(path_).rfind(std::string(CoeffCache::kVersion), 0), 0u);
}

TEST(CoeffCache, SameObjectOnRepeatLookup) {
  CoeffCache cache;
  EXPECT_EQ(cache.Abs(9).get(), cache.Abs(9).get());
  EXPECT_EQ(cache.ShiftedRelu(0.3, 9).get(), cache.ShiftedRelu(0.3, 9).get());
}

}  // namespace
}  // namespace dpaudit
