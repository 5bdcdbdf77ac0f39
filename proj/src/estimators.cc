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

#include "dpaudit/estimators.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>

#include "dpaudit/error.h"
#include "dpaudit/mvue.h"
#include "dpaudit/numeric.h"

namespace dpaudit {
namespace {

CoeffCache& Cache(CoeffCache* cache) {
  return cache != nullptr ? *cache : CoeffCache::Default();
}

// (part used to pick the branch, part used for the value)
std::pair<const EmpiricalHistogram*, const EmpiricalHistogram*> Roles(
    const SampleSplit& split, SplitMode mode, const char* what) {
  const std::size_t need = mode == SplitMode::kSplit ? 2 : 1;
  if (split.parts.size() < need) {
    throw DomainError(std::string(what) + ": split mode needs " +
                      std::to_string(need) + " histogram(s), got " +
                      std::to_string(split.parts.size()));
  }
  const EmpiricalHistogram* first = &split.parts[0];
  const EmpiricalHistogram* second =
      mode == SplitMode::kSplit ? &split.parts[1] : first;
  return {first, second};
}

void CheckRate(const EmpiricalHistogram& h, double n) {
  if (h.rate() != n) {
    throw DomainError("histogram rate does not match the configured n");
  }
}

EstimateTerms Finish(EstimateTerms t) {
  t.raw_sum = PairwiseSum(t.terms);
  t.value = Clamp01(t.raw_sum);
  return t;
}

EstimateTerms TwoSided(const SampleSplit& p_split, const SampleSplit& q_split,
                       const EstimatorConfig& config, CoeffCache* cache,
                       bool parallel) {
  config.Validate();
  const auto [p1, p2] = Roles(p_split, config.split_mode, "estimate");
  const auto [q1, q2] = Roles(q_split, config.split_mode, "estimate");
  for (const auto* h : {p1, p2, q1, q2}) CheckRate(*h, config.n);

  const int degree = config.degree();
  CoeffCache& c = Cache(cache);
  // Build outside the parallel region.
  c.Abs(degree);
  c.H(degree);

  EstimateTerms t;
  const std::size_t size =
      std::max({p1->size(), p2->size(), q1->size(), q2->size()});
  for (std::size_t i = 0; i < size; ++i) {
    if (p1->count(i) + p2->count(i) + q1->count(i) + q2->count(i) > 0) {
      t.symbols.push_back(i);
    }
  }
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(t.symbols.size());
  t.labels.resize(m);
  t.terms.resize(m);
  const double e = std::exp(config.epsilon);
  std::exception_ptr failure;
  std::mutex failure_mu;

#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    try {
      const std::size_t i = t.symbols[k];
      const double a1 = p1->value(i), b1 = q1->value(i);
      const double a2 = p2->value(i), b2 = q2->value(i);
      const RegimeLabel label = Region2dClassify(a1, b1, config);
      double term = 0.0;
      switch (label) {
        case RegimeLabel::kSmoothBelow:
          break;
        case RegimeLabel::kSmoothAbove:
          term = a2 - e * b2;
          break;
        case RegimeLabel::kNonSmoothSmall:
          term = DTilde1(a2, b2, config.n, degree, config.c1, config.epsilon,
                         &c);
          break;
        case RegimeLabel::kNonSmoothLarge:
          term = DTilde2(a2, b2, a1, b1, config.n, degree, config.c1,
                         config.epsilon, &c);
          break;
      }
      t.labels[k] = label;
      t.terms[k] = term;
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return Finish(std::move(t));
}

}  // namespace

EstimatorConfig EstimatorConfig::Synthetic(double epsilon, double n) {
  EstimatorConfig c;
  c.epsilon = epsilon;
  c.n = n;
  c.c3 = 1.5;
  return c;
}

EstimatorConfig EstimatorConfig::Audit(double epsilon, double n) {
  EstimatorConfig c;
  c.epsilon = epsilon;
  c.n = n;
  c.c3 = 0.9;
  c.split_mode = SplitMode::kNoSplit;
  return c;
}

int EstimatorConfig::degree() const {
  if (degree_override > 0) return degree_override;
  return static_cast<int>(std::floor(c3 * std::log(n)));
}

double EstimatorConfig::log_n_over_n() const { return std::log(n) / n; }

void EstimatorConfig::Validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("epsilon must be finite and non-negative");
  }
  if (!(n > 1.0) || !std::isfinite(n)) {
    throw DomainError("n must be finite and greater than 1");
  }
  if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) {
    throw DomainError("c1, c2, c3 must be positive");
  }
  if (!(c2 < c1)) throw DomainError("c2 must be smaller than c1");
  const int k = degree();
  if (k < 1) throw DomainError("degree floor(c3 ln n) must be at least 1");
  if (k > kMaxDegree) {
    throw DomainError("degree " + std::to_string(k) + " exceeds " +
                      std::to_string(kMaxDegree));
  }
}

std::vector<std::string> EstimatorConfig::Warnings() const {
  std::vector<std::string> w;
  const double limit = 8.0 / std::pow(std::sqrt(2.0) + 1.0, 2) - 1.0;
  if (c2 / c1 >= limit) {
    std::ostringstream os;
    os << "c2/c1 = " << c2 / c1 << " is not below " << limit
       << "; the two-sample error bound assumes it is";
    w.push_back(os.str());
  }
  return w;
}

std::string_view RegimeName(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::kSmoothBelow:
      return "smooth_below";
    case RegimeLabel::kSmoothAbove:
      return "smooth_above";
    case RegimeLabel::kNonSmoothSmall:
      return "nonsmooth_small";
    case RegimeLabel::kNonSmoothLarge:
      return "nonsmooth_large";
  }
  return "?";
}

double PluginEstimate(std::span<const double> p, std::span<const double> q,
                      double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
  const double e = std::exp(epsilon);
  const std::size_t size = std::max(p.size(), q.size());
  std::vector<double> terms(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double pi = i < p.size() ? p[i] : 0.0;
    const double qi = i < q.size() ? q[i] : 0.0;
    terms[i] = PositivePart(pi - e * qi);
  }
  return Clamp01(PairwiseSum(terms));
}

double PluginEstimate(const Distribution& p, const EmpiricalHistogram& q,
                      double epsilon) {
  const auto qv = q.Values(q.size());
  return PluginEstimate(p.probs(), qv, epsilon);
}

double PluginEstimate(const EmpiricalHistogram& p, const EmpiricalHistogram& q,
                      double epsilon) {
  const auto pv = p.Values(p.size());
  const auto qv = q.Values(q.size());
  return PluginEstimate(pv, qv, epsilon);
}

Interval RegionKnownP(double p, const EstimatorConfig& config) {
  const double ln = config.log_n_over_n();
  const double e = std::exp(config.epsilon);
  if (p <= config.c1 * e * ln) return {0.0, (config.c1 + config.c2) * ln};
  const double center = p / e;
  const double half = std::sqrt(config.c2 * center * ln);
  return {center - half, center + half};
}

RegimeLabel ClassifyKnownP(double p, double q_hat1,
                           const EstimatorConfig& config) {
  const Interval u = RegionKnownP(p, config);
  if (q_hat1 > u.hi) return RegimeLabel::kSmoothBelow;
  if (q_hat1 < u.lo) return RegimeLabel::kSmoothAbove;
  const double delta = config.c1 * config.log_n_over_n();
  return p <= std::exp(config.epsilon) * delta ? RegimeLabel::kNonSmoothSmall
                                               : RegimeLabel::kNonSmoothLarge;
}

RegimeLabel Region2dClassify(double p_hat1, double q_hat1,
                             const EstimatorConfig& config) {
  const double ln = config.log_n_over_n();
  const double eq = std::exp(config.epsilon) * q_hat1;
  const double threshold =
      std::sqrt((config.c1 + config.c2) * ln) *
      (std::sqrt(p_hat1) + std::sqrt(eq));
  const double diff = p_hat1 - eq;
  if (diff < -threshold) return RegimeLabel::kSmoothBelow;
  if (diff > threshold) return RegimeLabel::kSmoothAbove;
  return p_hat1 + eq < config.c1 * ln ? RegimeLabel::kNonSmoothSmall
                                      : RegimeLabel::kNonSmoothLarge;
}

EstimateTerms EstimateKnownPTerms(const Distribution& p,
                                  const SampleSplit& q_split,
                                  const EstimatorConfig& config,
                                  CoeffCache* cache) {
  config.Validate();
  const auto [q1, q2] = Roles(q_split, config.split_mode, "known-P estimate");
  CheckRate(*q1, config.n);
  CheckRate(*q2, config.n);
  const int degree = config.degree();
  const double e = std::exp(config.epsilon);

  EstimateTerms t;
  const std::size_t size = std::max({p.size(), q1->size(), q2->size()});
  for (std::size_t i = 0; i < size; ++i) {
    const double pi = i < p.size() ? p[i] : 0.0;
    if (pi > 0.0 || q1->count(i) > 0 || q2->count(i) > 0) {
      t.symbols.push_back(i);
    }
  }
  for (std::size_t i : t.symbols) {
    const double pi = i < p.size() ? p[i] : 0.0;
    const double b1 = q1->value(i), b2 = q2->value(i);
    const RegimeLabel label = ClassifyKnownP(pi, b1, config);
    double term = 0.0;
    switch (label) {
      case RegimeLabel::kSmoothBelow:
        break;
      case RegimeLabel::kSmoothAbove:
        term = pi - e * b2;
        break;
      case RegimeLabel::kNonSmoothSmall:
        term = DTildeKnownCase1(b2, pi, config.n, degree, config.c1,
                                config.epsilon, cache);
        break;
      case RegimeLabel::kNonSmoothLarge:
        term = DTildeKnownCase2(b2, pi, config.n, degree, config.c1,
                                config.epsilon, cache);
        break;
    }
    t.labels.push_back(label);
    t.terms.push_back(term);
  }
  return Finish(std::move(t));
}

double EstimateKnownP(const Distribution& p, const SampleSplit& q_split,
                      const EstimatorConfig& config, CoeffCache* cache) {
  return EstimateKnownPTerms(p, q_split, config, cache).value;
}

EstimateTerms EstimateTermsParallel(const SampleSplit& p_split,
                                    const SampleSplit& q_split,
                                    const EstimatorConfig& config,
                                    CoeffCache* cache) {
  return TwoSided(p_split, q_split, config, cache, true);
}

EstimateTerms EstimateTermsSerial(const SampleSplit& p_split,
                                  const SampleSplit& q_split,
                                  const EstimatorConfig& config,
                                  CoeffCache* cache) {
  return TwoSided(p_split, q_split, config, cache, false);
}

double Estimate(const SampleSplit& p_split, const SampleSplit& q_split,
                const EstimatorConfig& config, CoeffCache* cache) {
  return EstimateTermsParallel(p_split, q_split, config, cache).value;
}

double EstimateSerial(const SampleSplit& p_split, const SampleSplit& q_split,
                      const EstimatorConfig& config, CoeffCache* cache) {
  return EstimateTermsSerial(p_split, q_split, config, cache).value;
}

double Estimate(const EmpiricalHistogram& p, const EmpiricalHistogram& q,
                const EstimatorConfig& config, CoeffCache* cache) {
  EstimatorConfig c = config;
  c.split_mode = SplitMode::kNoSplit;
  return Estimate(SampleSplit{{p}}, SampleSplit{{q}}, c, cache);
}

}  // namespace dpaudit
