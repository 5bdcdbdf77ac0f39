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
#include <string>

#include "dpaudit/error.h"
#include "dpaudit/numeric.h"

namespace dpaudit {
namespace {

void CheckSameSize(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("alphabet sizes differ: " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

void CheckEpsilon(double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
}

}  // namespace

Distribution::Distribution(std::vector<double> probs, double tolerance)
    : probs_(std::move(probs)), tolerance_(tolerance) {
  if (probs_.empty()) throw DomainError("distribution needs at least one symbol");
  if (!(tolerance_ >= 0.0)) throw DomainError("tolerance must be >= 0");
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError("probabilities must be finite and non-negative");
    }
  }
  const double total = PairwiseSum(probs_);
  if (std::fabs(total - 1.0) > tolerance_) {
    throw DomainError("probabilities sum to " + std::to_string(total));
  }
}

Distribution Distribution::Uniform(std::size_t size) {
  if (size == 0) throw DomainError("distribution needs at least one symbol");
  return Distribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Distribution Distribution::Zipf(std::size_t size, double alpha) {
  if (size == 0) throw DomainError("distribution needs at least one symbol");
  std::vector<double> w(size);
  for (std::size_t i = 0; i < size; ++i) {
    w[i] = std::pow(static_cast<double>(i + 1), -alpha);
  }
  const double total = PairwiseSum(w);
  for (double& x : w) x /= total;
  return Distribution(std::move(w));
}

Distribution Distribution::Degenerate(std::size_t size, std::size_t symbol) {
  if (symbol >= size) throw DomainError("symbol outside alphabet");
  std::vector<double> w(size, 0.0);
  w[symbol] = 1.0;
  return Distribution(std::move(w));
}

PrivacyPoint::PrivacyPoint(double eps, double del) : epsilon(eps), delta(del) {
  CheckEpsilon(epsilon);
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw DomainError("delta must lie in [0, 1]");
  }
}

double ApproxDpDivergence(std::span<const double> p, std::span<const double> q,
                          double epsilon) {
  CheckSameSize(p.size(), q.size());
  CheckEpsilon(epsilon);
  const double scale = std::exp(epsilon);
  std::vector<double> terms(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    terms[i] = PositivePart(p[i] - scale * q[i]);
  }
  return PairwiseSum(terms);
}

double ApproxDpDivergence(const Distribution& p, const Distribution& q,
                          double epsilon) {
  return ApproxDpDivergence(p.probs(), q.probs(), epsilon);
}

bool IsEpsDeltaDp(const Distribution& p, const Distribution& q,
                  const PrivacyPoint& point) {
  return ApproxDpDivergence(p, q, point.epsilon) <= point.delta &&
         ApproxDpDivergence(q, p, point.epsilon) <= point.delta;
}

std::vector<std::size_t> CertificateSet(std::span<const double> p,
                                        std::span<const double> q,
                                        double epsilon) {
  CheckSameSize(p.size(), q.size());
  CheckEpsilon(epsilon);
  const double scale = std::exp(epsilon);
  std::vector<std::size_t> set;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] - scale * q[i] > 0.0) set.push_back(i);
  }
  return set;
}

std::vector<std::size_t> CertificateSet(const Distribution& p,
                                        const Distribution& q, double epsilon) {
  return CertificateSet(p.probs(), q.probs(), epsilon);
}

double SetMargin(std::span<const double> p, std::span<const double> q,
                 double epsilon, std::span<const std::size_t> set) {
  CheckSameSize(p.size(), q.size());
  CheckEpsilon(epsilon);
  const double scale = std::exp(epsilon);
  std::vector<double> terms;
  terms.reserve(set.size());
  for (std::size_t i : set) {
    if (i >= p.size()) throw DimensionError("set member outside alphabet");
    terms.push_back(p[i] - scale * q[i]);
  }
  return PairwiseSum(terms);
}

}  // namespace dpaudit
