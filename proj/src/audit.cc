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

#include "dpaudit/audit.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "dpaudit/error.h"
#include "dpaudit/numeric.h"

namespace dpaudit {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

int Threads(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

// Collects the first exception thrown inside a parallel loop.
class FirstError {
 public:
  void Capture() {
    std::lock_guard<std::mutex> lock(mu_);
    if (!error_) error_ = std::current_exception();
  }
  void Rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

void MeanAndStderr(const std::vector<double>& v, double* mean, double* se) {
  const double m = PairwiseSum(v) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  *mean = m;
  *se = v.size() > 1 ? std::sqrt(ss / (v.size() - 1) / v.size()) : 0.0;
}

struct Sampled {
  SymbolDictionary dict{0.0};
  EmpiricalHistogram d{1.0, {}};
  EmpiricalHistogram dprime{1.0, {}};
};

EmpiricalHistogram SampleSide(const MechanismSpec& spec,
                              const QueryDatabasePair& pair, Side side,
                              double n, RandomStream rng,
                              SymbolDictionary& dict) {
  const std::int64_t draws = SamplePoisson(rng, n);
  std::vector<std::int64_t> counts;
  for (std::int64_t k = 0; k < draws; ++k) {
    const std::size_t id = dict.Symbolize(SampleMechanism(spec, pair, side, rng));
    if (id >= counts.size()) counts.resize(id + 1, 0);
    ++counts[id];
  }
  return EmpiricalHistogram(n, std::move(counts));
}

}  // namespace

std::vector<double> DefaultEpsGrid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(i / 20.0);
  return g;
}

const AuditRecord& AuditReport::At(double eps) const {
  if (records.empty()) throw DegenerateError("empty audit report");
  const AuditRecord* best = &records.front();
  for (const auto& r : records) {
    if (std::abs(r.epsilon - eps) < std::abs(best->epsilon - eps)) best = &r;
  }
  return *best;
}

bool AuditReport::ViolationDetected() const {
  const double excess = at_claimed.delta_hat - spec.ClaimedDelta();
  return excess > 3.0 * at_claimed.stderr_ && excess > violation_tolerance;
}

namespace {

void WriteRows(const std::vector<AuditRecord>& rows, std::ostream& out) {
  out << "epsilon,delta_hat,stderr,trials,n,category\n";
  for (const auto& r : rows) {
    out << FormatDouble(r.epsilon) << ',' << FormatDouble(r.delta_hat) << ','
        << FormatDouble(r.stderr_) << ',' << r.trials << ','
        << FormatDouble(r.n) << ',' << r.category << '\n';
  }
}

}  // namespace

void AuditReport::WriteCsv(std::ostream& out) const { WriteRows(records, out); }

void AuditReport::WriteCategoryCsv(std::ostream& out) const {
  WriteRows(category_records, out);
}

void AuditReport::WriteCertificate(std::ostream& out) const {
  out << "mechanism=" << mechanism << '\n';
  if (!certificate) {
    out << "certificate=none\n";
    return;
  }
  const Certificate& c = *certificate;
  out << "epsilon=" << FormatDouble(c.epsilon) << '\n'
      << "claimed_delta=" << FormatDouble(c.claimed_delta) << '\n'
      << "category=" << c.category << '\n'
      << "trial=" << c.trial << '\n'
      << "margin=" << FormatDouble(c.margin) << '\n'
      << "symbols=";
  for (std::size_t i = 0; i < c.symbols.size(); ++i) {
    out << (i ? "," : "") << c.symbols[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < c.symbols.size(); ++i) {
    out << "symbol " << c.symbols[i] << ' ' << c.descriptions[i] << '\n';
  }
  // Enough to recompute the margin offline.
  out << "[p_hat]\n";
  c.p_hat.Write(out);
  out << "[q_hat]\n";
  c.q_hat.Write(out);
}

AuditReport RunAudit(const MechanismSpec& spec,
                     const std::vector<QueryDatabasePair>& pairs,
                     const AuditOptions& options) {
  spec.Validate();
  if (pairs.empty()) throw DomainError("audit needs at least one pair");
  for (const auto& p : pairs) CheckPairFor(spec, p);
  if (options.trials < 1) throw DomainError("trials must be at least 1");
  if (!(options.n > 0.0)) throw DomainError("n must be positive");
  if (!(options.violation_tolerance >= 0.0)) {
    throw DomainError("violation tolerance must be non-negative");
  }
  const std::vector<double> grid =
      options.eps_grid.empty() ? DefaultEpsGrid() : options.eps_grid;
  for (double e : grid) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw DomainError("epsilon grid values must be finite and >= 0");
    }
  }
  std::vector<double> eval = grid;
  std::size_t e0_index = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] - spec.epsilon0) < 1e-12) e0_index = i;
  }
  if (e0_index == grid.size()) eval.push_back(spec.epsilon0);

  EstimatorConfig base = options.config;
  base.n = options.n;
  base.epsilon = 0.0;
  base.Validate();
  const int degree = base.degree();
  CoeffCache::Default().Abs(degree);
  CoeffCache::Default().H(degree);

  const double bin_width = options.bin_width >= 0.0
                               ? options.bin_width
                               : DefaultBinWidth(spec.kind);
  const int trials = options.trials;
  const int num_pairs = static_cast<int>(pairs.size());
  const int dirs = options.both_directions ? 2 : 1;
  const int cats = num_pairs * dirs;
  const int threads = Threads(options.jobs);

  AuditReport report;
  report.mechanism = std::string(MechanismId(spec.kind));
  report.spec = spec;
  report.both_directions = options.both_directions;
  report.violation_tolerance = options.violation_tolerance;

  // Phase 1: samples.
  std::vector<Sampled> samples(static_cast<std::size_t>(trials) * num_pairs);
  const RandomStream root(options.seed);
  auto start = Clock::now();
  {
    FirstError err;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int idx = 0; idx < trials * num_pairs; ++idx) {
      try {
        const int t = idx / num_pairs, c = idx % num_pairs;
        const RandomStream rs = root.Substream(t).Substream(c);
        Sampled& s = samples[idx];
        s.dict = SymbolDictionary(bin_width);
        s.d = SampleSide(spec, pairs[c], Side::kD, options.n, rs.Substream(0),
                         s.dict);
        s.dprime = SampleSide(spec, pairs[c], Side::kDprime, options.n,
                              rs.Substream(1), s.dict);
        if (s.dict.size() == 0) {
          throw DegenerateError("no samples were drawn; increase n");
        }
      } catch (...) {
        err.Capture();
      }
    }
    err.Rethrow();
  }
  report.sampling_seconds = Seconds(start);

  // Phase 2: estimates, est[(t * cats + cat) * eval + e].
  start = Clock::now();
  const std::size_t ne = eval.size();
  std::vector<double> est(static_cast<std::size_t>(trials) * cats * ne);
  {
    FirstError err;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int idx = 0; idx < trials * num_pairs; ++idx) {
      try {
        const int t = idx / num_pairs, c = idx % num_pairs;
        const Sampled& s = samples[idx];
        const SampleSplit d{{s.d}}, dp{{s.dprime}};
        EstimatorConfig cfg = base;
        cfg.split_mode = SplitMode::kNoSplit;
        for (std::size_t e = 0; e < ne; ++e) {
          cfg.epsilon = eval[e];
          for (int dir = 0; dir < dirs; ++dir) {
            const int cat = c * dirs + dir;
            est[(static_cast<std::size_t>(t) * cats + cat) * ne + e] =
                dir == 0 ? EstimateSerial(d, dp, cfg)
                         : EstimateSerial(dp, d, cfg);
          }
        }
      } catch (...) {
        err.Capture();
      }
    }
    err.Rethrow();
  }
  report.estimation_seconds = Seconds(start);

  auto cat_name = [&](int cat) {
    const auto& p = pairs[cat / dirs];
    return cat % dirs == 0 ? p.category : p.category + " (swapped)";
  };
  // mean/se per (cat, e)
  std::vector<double> mean(cats * ne), se(cats * ne);
  std::vector<double> column(trials);
  for (int cat = 0; cat < cats; ++cat) {
    for (std::size_t e = 0; e < ne; ++e) {
      for (int t = 0; t < trials; ++t) {
        column[t] = est[(static_cast<std::size_t>(t) * cats + cat) * ne + e];
      }
      MeanAndStderr(column, &mean[cat * ne + e], &se[cat * ne + e]);
    }
  }
  auto worst = [&](std::size_t e) {
    int best = 0;
    for (int cat = 1; cat < cats; ++cat) {
      if (mean[cat * ne + e] > mean[best * ne + e]) best = cat;
    }
    return best;
  };
  for (std::size_t e = 0; e < grid.size(); ++e) {
    for (int cat = 0; cat < cats; ++cat) {
      report.category_records.push_back({eval[e], mean[cat * ne + e],
                                         se[cat * ne + e], trials, options.n,
                                         cat_name(cat)});
    }
    const int w = worst(e);
    report.records.push_back({eval[e], mean[w * ne + e], se[w * ne + e],
                              trials, options.n, cat_name(w)});
  }
  for (std::size_t e = 0; e + 1 < grid.size(); ++e) {
    const auto& a = report.records[e];
    const auto& b = report.records[e + 1];
    if (b.epsilon > a.epsilon &&
        b.delta_hat > a.delta_hat + 2.0 * std::max(a.stderr_, b.stderr_)) {
      report.notes.push_back("delta_hat rises between eps=" +
                             FormatDouble(a.epsilon) + " and eps=" +
                             FormatDouble(b.epsilon));
    }
  }
  if (options.both_directions) {
    report.notes.push_back(
        "both orders (D,D') and (D',D) audited; the max is reported");
  }

  // Certificate at the claimed budget, only when the estimate clears the
  // claim by three standard errors.
  const std::size_t e0 = e0_index < grid.size() ? e0_index : grid.size();
  const int w = worst(e0);
  const double claimed = spec.ClaimedDelta();
  report.at_claimed = {eval[e0], mean[w * ne + e0], se[w * ne + e0], trials,
                       options.n, cat_name(w)};
  if (report.ViolationDetected()) {
    int best_t = 0;
    for (int t = 1; t < trials; ++t) {
      if (est[(static_cast<std::size_t>(t) * cats + w) * ne + e0] >
          est[(static_cast<std::size_t>(best_t) * cats + w) * ne + e0]) {
        best_t = t;
      }
    }
    const Sampled& s = samples[best_t * num_pairs + w / dirs];
    const bool swapped = w % dirs == 1;
    const EmpiricalHistogram& ph = swapped ? s.dprime : s.d;
    const EmpiricalHistogram& qh = swapped ? s.d : s.dprime;
    const auto pv = ph.Values(s.dict.size());
    const auto qv = qh.Values(s.dict.size());
    Certificate c;
    c.epsilon = spec.epsilon0;
    c.claimed_delta = claimed;
    c.category = cat_name(w);
    c.trial = best_t;
    c.symbols = CertificateSet(pv, qv, spec.epsilon0);
    c.margin = SetMargin(pv, qv, spec.epsilon0, c.symbols) - claimed;
    if (!c.symbols.empty() && c.margin > 0.0) {
      for (std::size_t id : c.symbols) {
        c.descriptions.push_back(s.dict.Describe(id));
      }
      c.p_hat = ph;
      c.q_hat = qh;
      report.certificate = std::move(c);
    }
  }
  return report;
}

double JackknifeMeanStderr(const std::vector<double>& values) {
  const std::size_t t = values.size();
  if (t < 2) return 0.0;
  const double total = PairwiseSum(values);
  std::vector<double> loo(t);
  for (std::size_t i = 0; i < t; ++i) {
    loo[i] = (total - values[i]) / static_cast<double>(t - 1);
  }
  const double m = PairwiseSum(loo) / static_cast<double>(t);
  double ss = 0.0;
  for (double v : loo) ss += (v - m) * (v - m);
  return std::sqrt(static_cast<double>(t - 1) / t * ss);
}

std::vector<MseRow> SyntheticMse(const Distribution& p, const Distribution& q,
                                 double epsilon, const MseOptions& options) {
  if (p.size() != q.size()) throw DimensionError("P and Q sizes differ");
  if (options.trials < 1) throw DomainError("trials must be at least 1");
  if (options.n_grid.empty()) throw DomainError("empty n grid");
  const double truth = ApproxDpDivergence(p, q, epsilon);
  const SymbolSampler sp = MakeDistributionSampler(p);
  const SymbolSampler sq = MakeDistributionSampler(q);
  const RandomStream root(options.seed);
  const int threads = Threads(options.jobs);

  std::vector<MseRow> rows;
  for (std::size_t ni = 0; ni < options.n_grid.size(); ++ni) {
    EstimatorConfig cfg = options.config;
    cfg.n = options.n_grid[ni];
    cfg.epsilon = epsilon;
    cfg.Validate();
    CoeffCache::Default().Abs(cfg.degree());
    CoeffCache::Default().H(cfg.degree());
    const int parts = cfg.split_mode == SplitMode::kSplit ? 2 : 1;
    const int trials = options.trials;
    std::vector<double> se_plug(trials), se_alg(trials);
    FirstError err;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int t = 0; t < trials; ++t) {
      try {
        const RandomStream rs = root.Substream(ni).Substream(t);
        const SampleSplit ps = SplitSamples(sp, cfg.n, parts, rs.Substream(0));
        const SampleSplit qs = SplitSamples(sq, cfg.n, parts, rs.Substream(1));
        const double a = PluginEstimate(ps.parts[0], qs.parts[0], epsilon);
        const double b = EstimateSerial(ps, qs, cfg);
        se_plug[t] = (a - truth) * (a - truth);
        se_alg[t] = (b - truth) * (b - truth);
      } catch (...) {
        err.Capture();
      }
    }
    err.Rethrow();
    MseRow row;
    row.n = cfg.n;
    row.degree = cfg.degree();
    row.truth = truth;
    row.mse_plugin = PairwiseSum(se_plug) / trials;
    row.mse_alg2 = PairwiseSum(se_alg) / trials;
    row.se_plugin = JackknifeMeanStderr(se_plug);
    row.se_alg2 = JackknifeMeanStderr(se_alg);
    rows.push_back(row);
  }
  return rows;
}

void WriteMseCsv(const std::vector<MseRow>& rows, std::ostream& out) {
  out << "n,K,truth,mse_plugin,se_plugin,mse_alg2,se_alg2\n";
  for (const auto& r : rows) {
    out << FormatDouble(r.n) << ',' << r.degree << ',' << FormatDouble(r.truth)
        << ',' << FormatDouble(r.mse_plugin) << ','
        << FormatDouble(r.se_plugin) << ',' << FormatDouble(r.mse_alg2) << ','
        << FormatDouble(r.se_alg2) << '\n';
  }
}

}  // namespace dpaudit
