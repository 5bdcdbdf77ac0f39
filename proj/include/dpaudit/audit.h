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

// Audit orchestration: sample a mechanism on neighbouring inputs, estimate
// delta(eps) over a grid, keep the worst category, and extract a violating
// output set when there is one. Also the synthetic MSE sweep.

#ifndef DPAUDIT_AUDIT_H_
#define DPAUDIT_AUDIT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpaudit/divergence.h"
#include "dpaudit/estimators.h"
#include "dpaudit/mechanisms.h"
#include "dpaudit/sampling.h"

namespace dpaudit {

struct AuditRecord {
  double epsilon = 0.0;
  double delta_hat = 0.0;  // mean over trials
  double stderr_ = 0.0;
  int trials = 0;
  double n = 0.0;
  std::string category;
};

struct Certificate {
  double epsilon = 0.0;
  double claimed_delta = 0.0;
  std::string category;
  int trial = 0;
  std::vector<std::size_t> symbols;
  std::vector<std::string> descriptions;
  // P_hat(T) - e^eps Q_hat(T) - claimed delta, > 0 when emitted.
  double margin = 0.0;
  // The histograms the set was read off (P = first side of the category).
  EmpiricalHistogram p_hat{1.0, {}};
  EmpiricalHistogram q_hat{1.0, {}};
};

struct AuditReport {
  std::string mechanism;
  MechanismSpec spec;
  std::vector<AuditRecord> records;           // one per eps, worst category
  std::vector<AuditRecord> category_records;  // every eps x category
  // Worst category at eps0, evaluated even when eps0 is off the grid.
  AuditRecord at_claimed;
  std::optional<Certificate> certificate;
  bool both_directions = true;
  double violation_tolerance = 0.0;
  std::vector<std::string> notes;
  double sampling_seconds = 0.0;
  double estimation_seconds = 0.0;

  // Record at the grid point closest to eps.
  const AuditRecord& At(double eps) const;
  void WriteCsv(std::ostream& out) const;
  void WriteCategoryCsv(std::ostream& out) const;
  void WriteCertificate(std::ostream& out) const;
  // delta_hat(eps0) exceeds delta0 by more than 3 stderr and by more than
  // the tolerance.
  bool ViolationDetected() const;
};

struct AuditOptions {
  std::vector<double> eps_grid;  // empty: 21 points on [0, 1]
  double n = 100000.0;
  int trials = 10;
  std::uint64_t seed = 1;
  EstimatorConfig config = EstimatorConfig::Audit(0.0, 100000.0);
  // Also audit (D', D) and report the max.
  bool both_directions = true;
  // Negative: DefaultBinWidth(kind).
  double bin_width = -1.0;
  // The estimator is biased upwards by a few 1e-3 on correct mechanisms,
  // which 3 standard errors alone do not absorb.
  double violation_tolerance = 0.01;
  // Worker cap; 0 uses the OpenMP default.
  int jobs = 0;
};

std::vector<double> DefaultEpsGrid();

AuditReport RunAudit(const MechanismSpec& spec,
                     const std::vector<QueryDatabasePair>& pairs,
                     const AuditOptions& options);

struct MseRow {
  double n = 0.0;
  int degree = 0;
  double truth = 0.0;
  double mse_plugin = 0.0;
  double mse_alg2 = 0.0;
  double se_plugin = 0.0;  // jackknife
  double se_alg2 = 0.0;
};

struct MseOptions {
  std::vector<double> n_grid{1e3, 1e4, 1e5};
  int trials = 100;
  std::uint64_t seed = 1;
  // epsilon and n are taken from the call and the grid.
  EstimatorConfig config = [] {
    auto c = EstimatorConfig::Synthetic(0.0, 1000.0);
    c.split_mode = SplitMode::kNoSplit;
    return c;
  }();
  int jobs = 0;
};

std::vector<MseRow> SyntheticMse(const Distribution& p, const Distribution& q,
                                 double epsilon, const MseOptions& options);
void WriteMseCsv(const std::vector<MseRow>& rows, std::ostream& out);

// Jackknife standard error of the mean of `values`.
double JackknifeMeanStderr(const std::vector<double>& values);

}  // namespace dpaudit

#endif  // DPAUDIT_AUDIT_H_
