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

// Finite discrete distributions and the approximate-DP divergence
//
//   d_eps(P || Q) = sum_i [p_i - e^eps q_i]^+ ,
//
// which is <= delta for every neighbouring pair (in both orders) exactly when
// the mechanism producing P and Q is (eps, delta)-differentially private.

#ifndef DPAUDIT_DIVERGENCE_H_
#define DPAUDIT_DIVERGENCE_H_

#include <cstddef>
#include <span>
#include <vector>

namespace dpaudit {

inline constexpr double kDefaultNormTolerance = 1e-9;

// A probability vector over the dense alphabet {0, ..., S-1}. Entries are
// non-negative and sum to one within `tolerance`.
class Distribution {
 public:
  explicit Distribution(std::vector<double> probs,
                        double tolerance = kDefaultNormTolerance);

  static Distribution Uniform(std::size_t size);
  // p_i proportional to 1 / (i+1)^alpha. Negative alpha gives increasing mass.
  static Distribution Zipf(std::size_t size, double alpha);
  // Point mass on `symbol`.
  static Distribution Degenerate(std::size_t size, std::size_t symbol);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  double tolerance() const { return tolerance_; }

 private:
  std::vector<double> probs_;
  double tolerance_;
};

struct PrivacyPoint {
  PrivacyPoint(double epsilon, double delta);

  double epsilon;
  double delta;
};

// Exact divergence of two (possibly unnormalised) non-negative vectors.
// Throws DimensionError on length mismatch and DomainError for eps < 0.
double ApproxDpDivergence(std::span<const double> p, std::span<const double> q,
                          double epsilon);
double ApproxDpDivergence(const Distribution& p, const Distribution& q,
                          double epsilon);

// True iff d_eps(P||Q) <= delta and d_eps(Q||P) <= delta.
bool IsEpsDeltaDp(const Distribution& p, const Distribution& q,
                  const PrivacyPoint& point);

// The set T = {i : p_i > e^eps q_i}, which maximises P(T) - e^eps Q(T) over
// all subsets. Returned in increasing symbol order.
std::vector<std::size_t> CertificateSet(std::span<const double> p,
                                        std::span<const double> q,
                                        double epsilon);
std::vector<std::size_t> CertificateSet(const Distribution& p,
                                        const Distribution& q, double epsilon);

// P(T) - e^eps Q(T).
double SetMargin(std::span<const double> p, std::span<const double> q,
                 double epsilon, std::span<const std::size_t> set);

}  // namespace dpaudit

#endif  // DPAUDIT_DIVERGENCE_H_
