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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dpaudit/audit.h"
#include "dpaudit/divergence.h"
#include "dpaudit/estimators.h"
#include "dpaudit/mechanisms.h"
#include "dpaudit/mvue.h"
#include "dpaudit/numeric.h"
#include "dpaudit/poly.h"
#include "dpaudit/rng.h"
#include "dpaudit/sampling.h"
#include "oracles.h"

namespace {

using namespace dpaudit;
using testing::PoissonMean;
using testing::PoissonMean2;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void Note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += (ok ? "" : "!") + what;
}

std::string F(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// --- 1 ---------------------------------------------------------------------

Outcome ExactOracles() {
  Outcome o;
  int cases = 0, bad = 0;
  double worst = 0.0;
  auto check = [&](long double got, double want) {
    ++cases;
    const double err = std::abs(static_cast<double>(got) - want) /
                       std::max(1.0, std::abs(want));
    worst = std::max(worst, err);
    if (!(err <= 1e-8)) ++bad;
  };
  const double c1 = 4.0;
  for (double n : {5.0, 10.0, 20.0, 40.0}) {
    const double delta = c1 * std::log(n) / n;
    for (int j = 0; j <= 5; ++j) {
      for (double q : {0.0, 0.2}) {
        for (double x : {0.1, 0.5}) {
          check(PoissonMean([&](double xh) { return GPoly(j, q, xh, n); }, n,
                            x),
                std::pow(x - q, j));
        }
      }
      for (auto [p, q] : {std::pair{0.2, 0.1}, std::pair{0.05, 0.3}}) {
        for (double eps : {0.0, 0.4}) {
          const double want = std::pow(std::exp(eps) * q - p, j);
          check(PoissonMean2([&](double ph,
                                 double qh) { return AHat(j, ph, qh, n, eps); },
                             n, p, q),
                want);
          check(PoissonMean2(
                    [&](double ph, double qh) {
                      return AHatCentered(j, ph, qh, n, eps, 0.17);
                    },
                    n, p, q),
                want);
        }
      }
    }
    for (int k = 1; k <= 6; ++k) {
      const double eps = 0.4, e = std::exp(eps);
      // Known P, small mass.
      {
        const double p = std::min(1.0, 0.5 * e * delta);
        const double scale = 2.0 * e * delta;
        const auto h = ShiftedReluApprox(p / scale, k);
        for (double q : {0.3 * p, p / e}) {
          check(PoissonMean(
                    [&](double qh) {
                      return DTildeKnownCase1(qh, p, n, k, c1, eps);
                    },
                    n, q),
                scale * h.EvaluateMonomial(q / (2 * delta)));
        }
      }
      // Known P, large mass (only reachable when e^eps Delta < 1).
      if (e * delta < 0.9) {
        const double p = 0.5 * (e * delta + 1.0);
        const double w = std::sqrt(p / e * delta);
        const auto r = RemezAbs(k);
        for (double q : {p / e, p / e + 0.5 * w}) {
          const double t = (q - p / e) / w;
          check(PoissonMean(
                    [&](double qh) {
                      return DTildeKnownCase2(qh, p, n, k, c1, eps);
                    },
                    n, q),
                0.5 * e * w * (r.EvaluateMonomial(t) - t));
        }
      }
      // Both unknown, small mass.
      {
        const auto h = CoeffCache::Default().H(k);
        for (auto [p, q] : {std::pair{0.02, 0.02}, std::pair{0.1, 0.03}}) {
          check(PoissonMean2(
                    [&](double ph, double qh) {
                      return DTilde1(ph, qh, n, k, c1, eps);
                    },
                    n, p, q),
                2 * delta * h->EvaluateMonomial(p / (2 * delta),
                                                e * q / (2 * delta)));
        }
      }
      // Both unknown, large mass, first half held fixed.
      {
        const auto r = RemezAbs(k);
        for (auto [p, q] : {std::pair{0.3, 0.25}, std::pair{0.6, 0.2}}) {
          const double w = DTilde2Width(p, q, n, c1, eps);
          const double t = (e * q - p) / w;
          check(PoissonMean2(
                    [&](double ph, double qh) {
                      return DTilde2(ph, qh, p, q, n, k, c1, eps);
                    },
                    n, p, q),
                0.5 * w * (r.EvaluateMonomial(t) - t));
        }
      }
    }
  }
  Note(o, cases >= 200, std::to_string(cases) + " combinations");
  Note(o, bad == 0, std::to_string(bad) + " off by >1e-8, worst " + F(worst));
  return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome PositivePartClosedForm() {
  Outcome o;
  int cases = 0;
  double worst = 0.0;
  for (double lam : {0.3, 1.7, 4.2, 11.0, 29.5}) {
    for (double n : {30.0, 40.0, 50.0, 75.0, 100.0, 200.0, 500.0, 1000.0,
                     5000.0, 1e5}) {
      const double q = lam / n;
      const double fl = std::floor(lam);
      const double closed =
          std::exp((fl + 1) * std::log(lam) - lam - std::lgamma(fl + 1)) / n;
      const long double m = PoissonMean(
          [&](double qh) {
            return ApproxDpDivergence(std::vector{qh}, std::vector{q}, 0.0);
          },
          n, q);
      worst = std::max(worst, std::abs(static_cast<double>(m) - closed));
      ++cases;
    }
  }
  Note(o, cases == 50, std::to_string(cases) + " pairs");
  Note(o, worst <= 1e-10, "max error " + F(worst));
  return o;
}

// --- 3 ---------------------------------------------------------------------

int Alternations(const UniPolyApprox& r) {
  return testing::CountAlternations(
      [&](double t) { return std::abs(t) - r.Evaluate(t); }, -1.0, 1.0,
      r.sup_error, 1e-6);
}

Outcome RemezQuality() {
  Outcome o;
  for (int k : {20, 40, 60}) {
    const auto r = RemezAbs(k);
    const double ks = k * r.sup_error;
    const int alt = Alternations(r);
    Note(o, std::abs(ks - 0.2802) <= 0.15 * 0.2802,
         "K=" + std::to_string(k) + " K*err=" + F(ks));
    Note(o, alt >= k + 2, "alternations " + std::to_string(alt));
  }
  return o;
}

// --- 4, 5 ------------------------------------------------------------------

std::vector<MseRow> SyntheticRows() {
  static const std::vector<MseRow> rows = [] {
    MseOptions opt;  // c1 = 4, c2 = 0.1, c3 = 1.5, 100 trials
    opt.seed = 2026;
    return SyntheticMse(Distribution::Uniform(100),
                        Distribution::Zipf(100, -0.6), 0.4, opt);
  }();
  return rows;
}

Outcome SyntheticOrdering() {
  Outcome o;
  for (const auto& r : SyntheticRows()) {
    const double se = std::hypot(r.se_plugin, r.se_alg2);
    const double gap = r.mse_plugin - r.mse_alg2;
    const bool ok = r.n >= 1e4 ? gap >= 2.0 * se : gap > 0.0;
    Note(o, ok, "n=" + F(r.n) + " plugin " + F(r.mse_plugin) + " alg2 " +
                    F(r.mse_alg2) + " gap/se " + F(gap / se));
  }
  return o;
}

Outcome PluginSlope() {
  Outcome o;
  const auto rows = SyntheticRows();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double x = std::log(r.n), y = std::log(r.mse_plugin);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double m = rows.size();
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  Note(o, slope >= -1.25 && slope <= -0.75, "slope " + F(slope));
  return o;
}

// --- 6 ---------------------------------------------------------------------

AuditReport Audit(MechanismKind kind, std::vector<double> grid,
                  double delta0 = 0.0) {
  MechanismSpec spec{kind, 0.5, delta0};
  AuditOptions opt;  // n = 1e5, 10 trials, c3 = 0.9
  opt.eps_grid = std::move(grid);
  opt.seed = 11;
  return RunAudit(spec, DefaultPairsFor(kind), opt);
}

bool CertificateSound(const AuditReport& r) {
  if (!r.certificate || r.certificate->symbols.empty()) return false;
  const auto& c = *r.certificate;
  const std::size_t s = std::max(c.p_hat.size(), c.q_hat.size());
  const auto pv = c.p_hat.Values(s), qv = c.q_hat.Values(s);
  const double margin =
      SetMargin(pv, qv, c.epsilon, c.symbols) - c.claimed_delta;
  return margin == c.margin && margin > 0.0;
}

Outcome MechanismAudits() {
  Outcome o;
  for (auto kind : {MechanismKind::kRnaLap, MechanismKind::kRnaExp}) {
    const double d = Audit(kind, {0.5}).At(0.5).delta_hat;
    Note(o, d <= 0.01, std::string(MechanismId(kind)) + " " + F(d));
  }
  for (auto kind : {MechanismKind::kRnmLap, MechanismKind::kRnmExp}) {
    const auto r = Audit(kind, {0.5});
    const double d = r.At(0.5).delta_hat;
    Note(o, d >= 0.05, std::string(MechanismId(kind)) + " " + F(d));
    Note(o, CertificateSound(r), "certificate");
  }
  {
    const auto r = Audit(MechanismKind::kHistogramWrongNoise, {0.5, 2.0});
    const double lo = r.At(0.5).delta_hat, hi = r.At(2.0).delta_hat;
    Note(o, lo >= 0.05, "histogram-wrong(0.5) " + F(lo));
    Note(o, hi <= 0.01, "histogram-wrong(2) " + F(hi));
  }
  {
    const auto r = Audit(MechanismKind::kIsvt3, DefaultEpsGrid());
    double cross = -1.0;
    for (const auto& rec : r.records) {
      if (rec.delta_hat <= 0.005) {
        cross = rec.epsilon;
        break;
      }
    }
    Note(o, cross >= 0.7 && cross <= 1.0, "isvt3 crossing " + F(cross));
  }
  {
    const double d = Audit(MechanismKind::kMtgm, {0.5}, 0.2).At(0.5).delta_hat;
    Note(o, std::abs(d - 0.2) <= 0.05, "mtgm " + F(d));
  }
  return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome ExactPmfs() {
  Outcome o;
  double tgm = 0.0, mtgm = -1.0;
  for (double e0 : {0.1, 0.5, 1.0, 2.0}) {
    for (int x = 0; x + 1 < kTgmRange; ++x) {
      for (auto [a, b] : {std::pair{x, x + 1}, std::pair{x + 1, x}}) {
        tgm = std::max(tgm, std::abs(ApproxDpDivergence(TgmPmf(a, e0),
                                                        TgmPmf(b, e0), e0)));
        for (double d0 : {0.05, 0.2, 0.5}) {
          mtgm = std::max(mtgm, ApproxDpDivergence(MtgmPmf(a, e0, d0),
                                                   MtgmPmf(b, e0, d0), e0) -
                                    d0);
        }
      }
    }
  }
  Note(o, tgm <= 1e-12, "tgm max d " + F(tgm));
  Note(o, mtgm <= 1e-12, "mtgm max d - delta0 " + F(mtgm));
  return o;
}

// --- 8 ---------------------------------------------------------------------

Outcome Properties() {
  Outcome o;
  RandomStream rng(8, 8);
  // Fuzzed histograms, both modes and the known-P estimator.
  bool in_range = true;
  for (int t = 0; t < 500; ++t) {
    const std::size_t s = 1 + rng.NextU64() % 60;
    const double n = 50.0 + static_cast<double>(rng.NextU64() % 5000);
    auto draw = [&] {
      std::vector<std::int64_t> c(s);
      for (auto& v : c) {
        v = rng.NextUniform() < 0.3 ? 0
                                    : static_cast<std::int64_t>(
                                          rng.NextU64() % static_cast<std::uint64_t>(1 + 3 * n / s));
      }
      return EmpiricalHistogram(n, c);
    };
    auto cfg = EstimatorConfig::Synthetic(0.05 * (rng.NextU64() % 60), n);
    cfg.split_mode = t % 2 ? SplitMode::kSplit : SplitMode::kNoSplit;
    const int parts = t % 2 ? 2 : 1;
    SampleSplit p, q;
    for (int i = 0; i < parts; ++i) {
      p.parts.push_back(draw());
      q.parts.push_back(draw());
    }
    const double v = Estimate(p, q, cfg);
    const double k = EstimateKnownP(Distribution::Uniform(s), q, cfg);
    in_range &= v >= 0.0 && v <= 1.0 && k >= 0.0 && k <= 1.0;
  }
  Note(o, in_range, "estimates in [0,1]");

  // Relabelling symbols does not change the estimate.
  double perm_err = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t s = 40;
    std::vector<std::int64_t> a(s), b(s), pa(s), pb(s);
    for (std::size_t i = 0; i < s; ++i) {
      a[i] = static_cast<std::int64_t>(rng.NextU64() % 60);
      b[i] = static_cast<std::int64_t>(rng.NextU64() % 60);
    }
    std::vector<std::size_t> perm(s);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = s - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.NextU64() % (i + 1)]);
    }
    for (std::size_t i = 0; i < s; ++i) pa[perm[i]] = a[i], pb[perm[i]] = b[i];
    auto cfg = EstimatorConfig::Synthetic(0.4, 800.0);
    cfg.split_mode = SplitMode::kNoSplit;
    perm_err = std::max(
        perm_err, std::abs(Estimate(EmpiricalHistogram(800.0, a),
                                    EmpiricalHistogram(800.0, b), cfg) -
                           Estimate(EmpiricalHistogram(800.0, pa),
                                    EmpiricalHistogram(800.0, pb), cfg)));
  }
  Note(o, perm_err <= 1e-12, "permutation " + F(perm_err));

  // Same seed, same bytes.
  {
    MechanismSpec spec{MechanismKind::kRnmLap, 0.5};
    AuditOptions opt;
    opt.n = 20000;
    opt.trials = 3;
    opt.eps_grid = {0.0, 0.5, 1.0};
    auto render = [&](int jobs) {
      opt.jobs = jobs;
      const auto r = RunAudit(spec, DefaultPairsFor(spec.kind), opt);
      std::ostringstream s;
      r.WriteCsv(s);
      r.WriteCategoryCsv(s);
      r.WriteCertificate(s);
      return s.str();
    };
    Note(o, render(0) == render(1), "report bytes");
  }

  // Certificate set against every subset.
  double cert_err = 0.0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t s = 1 + t % 12;
    std::vector<double> p(s), q(s);
    for (std::size_t i = 0; i < s; ++i) {
      p[i] = rng.NextUniform();
      q[i] = rng.NextUniform();
    }
    const double eps = 0.1 * (t % 13);
    const auto set = CertificateSet(p, q, eps);
    cert_err = std::max(cert_err,
                        std::abs(SetMargin(p, q, eps, set) -
                                 testing::BruteForceBestMargin(p, q, eps)));
  }
  Note(o, cert_err <= 1e-12, "certificate optimality " + F(cert_err));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> all = {
      {"exact-oracle suite", ExactOracles},
      {"positive-part closed form", PositivePartClosedForm},
      {"remez quality", RemezQuality},
      {"synthetic MSE ordering", SyntheticOrdering},
      {"plug-in rate", PluginSlope},
      {"mechanism audits", MechanismAudits},
      {"exact-pmf DP checks", ExactPmfs},
      {"property suites", Properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = all[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(Clock::now() - start).count();
    failed += !o.pass;
    std::printf("criterion %zu: %s %s (%s) [%.1fs]\n", i + 1,
                o.pass ? "PASS" : "FAIL", all[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed;
}
