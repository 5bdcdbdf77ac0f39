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

// The three divergence estimators: plug-in, known P, and both unknown.

#ifndef DPAUDIT_ESTIMATORS_H_
#define DPAUDIT_ESTIMATORS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpaudit/divergence.h"
#include "dpaudit/poly.h"
#include "dpaudit/sampling.h"

namespace dpaudit {

enum class SplitMode { kSplit, kNoSplit };

struct EstimatorConfig {
  double epsilon = 0.0;
  double c1 = 4.0;
  double c2 = 0.1;
  double c3 = 1.5;
  double n = 1.0;
  SplitMode split_mode = SplitMode::kSplit;
  // Non-zero replaces floor(c3 ln n); used by tests that need a small K.
  int degree_override = 0;

  // Constants used for the synthetic comparisons.
  static EstimatorConfig Synthetic(double epsilon, double n);
  // Mechanism audits: smaller degree, no sample split.
  static EstimatorConfig Audit(double epsilon, double n);

  int degree() const;
  double log_n_over_n() const;
  // Throws DomainError on inconsistent constants.
  void Validate() const;
  // Non-fatal remarks, e.g. c2/c1 above the range the error bound assumes.
  std::vector<std::string> Warnings() const;
};

enum class RegimeLabel {
  kSmoothBelow,     // contributes 0
  kSmoothAbove,     // plug-in term
  kNonSmoothSmall,  // small-mass polynomial
  kNonSmoothLarge,  // rescaled |t| polynomial
};

std::string_view RegimeName(RegimeLabel label);

struct Interval {
  double lo;
  double hi;
  bool Contains(double x) const { return lo <= x && x <= hi; }
};

// Clamped sum_i [p_i - e^eps q_i]^+; shorter inputs are padded with zeros.
double PluginEstimate(std::span<const double> p, std::span<const double> q,
                      double epsilon);
double PluginEstimate(const Distribution& p, const EmpiricalHistogram& q,
                      double epsilon);
double PluginEstimate(const EmpiricalHistogram& p, const EmpiricalHistogram& q,
                      double epsilon);

// Window of q values around which [p - e^eps q]^+ is treated as non-smooth.
Interval RegionKnownP(double p, const EstimatorConfig& config);
RegimeLabel ClassifyKnownP(double p, double q_hat1,
                           const EstimatorConfig& config);

RegimeLabel Region2dClassify(double p_hat1, double q_hat1,
                             const EstimatorConfig& config);

struct EstimateTerms {
  std::vector<std::size_t> symbols;
  std::vector<RegimeLabel> labels;
  std::vector<double> terms;
  double raw_sum = 0.0;
  double value = 0.0;  // clamped to [0, 1]
};

// Known P. Split mode reads q_split.parts[0] for classification and parts[1]
// for estimation; no-split mode uses parts[0] for both.
double EstimateKnownP(const Distribution& p, const SampleSplit& q_split,
                      const EstimatorConfig& config,
                      CoeffCache* cache = nullptr);
EstimateTerms EstimateKnownPTerms(const Distribution& p,
                                  const SampleSplit& q_split,
                                  const EstimatorConfig& config,
                                  CoeffCache* cache = nullptr);

// Both unknown. Per-symbol terms run in parallel; the reduction is a fixed
// pairwise sum, so the result does not depend on the thread count.
double Estimate(const SampleSplit& p_split, const SampleSplit& q_split,
                const EstimatorConfig& config, CoeffCache* cache = nullptr);
EstimateTerms EstimateTermsParallel(const SampleSplit& p_split,
                                    const SampleSplit& q_split,
                                    const EstimatorConfig& config,
                                    CoeffCache* cache = nullptr);
// Single-threaded reference.
double EstimateSerial(const SampleSplit& p_split, const SampleSplit& q_split,
                      const EstimatorConfig& config,
                      CoeffCache* cache = nullptr);
EstimateTerms EstimateTermsSerial(const SampleSplit& p_split,
                                  const SampleSplit& q_split,
                                  const EstimatorConfig& config,
                                  CoeffCache* cache = nullptr);

// No-split convenience: one histogram per side.
double Estimate(const EmpiricalHistogram& p, const EmpiricalHistogram& q,
                const EstimatorConfig& config, CoeffCache* cache = nullptr);

}  // namespace dpaudit

#endif  // DPAUDIT_ESTIMATORS_H_
