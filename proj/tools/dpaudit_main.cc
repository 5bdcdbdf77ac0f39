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

// dpaudit: command-line front end.
//
//   dpaudit audit --mechanism rnm-lap --eps0 0.5 --n 100000 --out r.csv
//   dpaudit synthetic-mse --dist zipf:-0.6 --S 100 --eps 0.4
//   dpaudit estimate --p p.hist --q q.hist --eps 0.5
//   dpaudit poly-table --K 17
//
// Exit codes: 0 ok, 2 privacy violation detected, 64 usage, 74 I/O.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "dpaudit/audit.h"
#include "dpaudit/config.h"
#include "dpaudit/error.h"
#include "dpaudit/estimators.h"
#include "dpaudit/mechanisms.h"
#include "dpaudit/numeric.h"
#include "dpaudit/poly.h"
#include "dpaudit/sampling.h"

namespace {

using namespace dpaudit;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 2;
constexpr int kExitUsage = 64;
constexpr int kExitSoftware = 70;
constexpr int kExitIo = 74;

using Clock = std::chrono::steady_clock;

void Phase(const std::string& name, double seconds) {
  std::cerr << "phase " << name << ' ' << FormatDouble(seconds) << "s\n";
}

double Since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Fills options that were not given on the command line from the config
// file. Flags win.
void ApplyConfig(CLI::App& app, const KeyValueConfig& config) {
  for (const auto& [key, value] : config.values()) {
    if (key.rfind("pair.", 0) == 0) continue;  // read by PairsFromConfig
    CLI::Option* opt = nullptr;
    try {
      opt = app.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw DomainError("config key '" + key + "' is not an option of '" +
                        app.get_name() + "'");
    }
    if (opt->count() == 0) {
      if (opt->get_type_size() == 0) {
        if (value == "true" || value == "1") opt->add_result("true");
      } else {
        opt->add_result(value);
      }
      opt->run_callback();
    }
  }
}

Distribution ParseDistribution(const std::string& text, std::size_t size) {
  if (text == "uniform") return Distribution::Uniform(size);
  if (text.rfind("zipf:", 0) == 0) {
    return Distribution::Zipf(size, std::stod(text.substr(5)));
  }
  if (text.rfind("point:", 0) == 0) {
    return Distribution::Degenerate(size, std::stoul(text.substr(6)));
  }
  throw DomainError("distribution must be uniform, zipf:<alpha> or "
                    "point:<symbol>, got '" + text + "'");
}

EmpiricalHistogram ReadHistogram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open histogram " + path);
  return EmpiricalHistogram::Read(in);
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

struct Constants {
  double c1 = 4.0;
  double c2 = 0.1;
  std::optional<double> c3;
};

void AddConstants(CLI::App* cmd, Constants& c) {
  cmd->add_option("--c1", c.c1, "band constant c1")->capture_default_str();
  cmd->add_option("--c2", c.c2, "band constant c2 (< c1)")
      ->capture_default_str();
  cmd->add_option("--c3", c.c3, "degree constant, K = floor(c3 ln n)");
}

void ApplyConstants(const Constants& c, EstimatorConfig& config) {
  config.c1 = c.c1;
  config.c2 = c.c2;
  if (c.c3) config.c3 = *c.c3;
  for (const auto& w : config.Warnings()) {
    std::cerr << "warning: " << w << '\n';
  }
}

struct Common {
  std::string config_path;
  std::string cache_path;
  int jobs = 0;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path,
                  "key = value file; command-line flags take precedence");
  cmd->add_option("--cache", c.cache_path,
                  "coefficient cache file (overrides $DPAUDIT_CACHE)");
  cmd->add_option("--jobs", c.jobs, "worker threads (default: all)")
      ->check(CLI::NonNegativeNumber);
}

void SetupCommon(const Common& c) {
  if (!c.cache_path.empty()) CoeffCache::SetDefaultPath(c.cache_path);
  if (c.jobs > 0) omp_set_num_threads(c.jobs);
}

// --- audit -----------------------------------------------------------------

struct AuditArgs {
  Common common;
  Constants constants;
  std::string mechanism;
  double eps0 = 0.5;
  double delta0 = 0.0;
  int bound = 1;
  double threshold = 1.0;
  double n = 100000;
  int trials = 10;
  std::uint64_t seed = 1;
  std::vector<double> eps_grid;
  double bin_width = -1.0;
  bool one_direction = false;
  double tolerance = 0.01;
  std::string out = "audit.csv";
  std::string cert;
  std::string categories_out;
  int queries = 0;
  std::string categories;
};

int RunAuditCommand(const AuditArgs& a, KeyValueConfig file) {
  SetupCommon(a.common);
  if (a.mechanism.empty()) {
    throw CLI::RequiredError("--mechanism");
  }
  MechanismSpec spec;
  spec.kind = ParseMechanismKind(a.mechanism);
  spec.epsilon0 = a.eps0;
  spec.delta0 = a.delta0;
  spec.bound = a.bound;
  spec.threshold = a.threshold;
  spec.Validate();
  if (a.queries > 0) file.Set("queries", std::to_string(a.queries));
  if (!a.categories.empty()) file.Set("categories", a.categories);
  const auto pairs = PairsFromConfig(file, spec.kind);

  AuditOptions o;
  o.eps_grid = a.eps_grid;
  o.n = a.n;
  o.trials = a.trials;
  o.seed = a.seed;
  o.config = EstimatorConfig::Audit(0.0, a.n);
  ApplyConstants(a.constants, o.config);
  o.both_directions = !a.one_direction;
  o.bin_width = a.bin_width;
  o.violation_tolerance = a.tolerance;
  o.jobs = a.common.jobs;

  auto t = Clock::now();
  {
    EstimatorConfig probe = o.config;
    probe.n = a.n;
    probe.Validate();
    CoeffCache::Default().Abs(probe.degree());
    CoeffCache::Default().H(probe.degree());
  }
  Phase("coefficients", Since(t));

  const AuditReport report = RunAudit(spec, pairs, o);
  Phase("sampling", report.sampling_seconds);
  Phase("estimation", report.estimation_seconds);

  t = Clock::now();
  {
    auto out = OpenOut(a.out);
    report.WriteCsv(out);
    if (!out.flush()) throw IoError("short write to " + a.out);
  }
  const std::string cert = a.cert.empty() ? a.out + ".cert" : a.cert;
  {
    auto out = OpenOut(cert);
    report.WriteCertificate(out);
    if (!out.flush()) throw IoError("short write to " + cert);
  }
  if (!a.categories_out.empty()) {
    auto out = OpenOut(a.categories_out);
    report.WriteCategoryCsv(out);
    if (!out.flush()) throw IoError("short write to " + a.categories_out);
  }
  Phase("report", Since(t));

  for (const auto& note : report.notes) std::cerr << "note: " << note << '\n';
  const auto& r = report.at_claimed;
  std::cout << report.mechanism << ": delta_hat(" << FormatDouble(r.epsilon)
            << ") = " << FormatDouble(r.delta_hat) << " +- "
            << FormatDouble(r.stderr_) << " [" << r.category << "], claimed "
            << FormatDouble(spec.ClaimedDelta()) << '\n';
  if (report.ViolationDetected()) {
    std::cout << "VIOLATION: estimate exceeds the claim by more than 3 "
                 "standard errors and the tolerance";
    if (report.certificate) {
      std::cout << "; certificate with " << report.certificate->symbols.size()
                << " symbols, margin "
                << FormatDouble(report.certificate->margin);
    }
    std::cout << '\n';
    return kExitViolation;
  }
  return kExitOk;
}

// --- synthetic-mse -----------------------------------------------------------

struct MseArgs {
  Common common;
  Constants constants;
  std::string dist_p = "uniform";
  std::string dist_q = "zipf:-0.6";
  std::size_t size = 100;
  double eps = 0.4;
  std::vector<double> n_grid{1e3, 1e4, 1e5};
  int trials = 100;
  std::uint64_t seed = 1;
  bool split = false;
  std::string out;
};

int RunMseCommand(const MseArgs& a) {
  SetupCommon(a.common);
  const Distribution p = ParseDistribution(a.dist_p, a.size);
  const Distribution q = ParseDistribution(a.dist_q, a.size);
  MseOptions o;
  o.n_grid = a.n_grid;
  o.trials = a.trials;
  o.seed = a.seed;
  o.jobs = a.common.jobs;
  o.config.split_mode = a.split ? SplitMode::kSplit : SplitMode::kNoSplit;
  ApplyConstants(a.constants, o.config);
  for (double n : o.n_grid) {
    EstimatorConfig c = o.config;
    c.n = n;
    c.epsilon = a.eps;
    c.Validate();
  }
  auto t = Clock::now();
  const auto rows = SyntheticMse(p, q, a.eps, o);
  Phase("trials", Since(t));
  if (a.out.empty()) {
    WriteMseCsv(rows, std::cout);
  } else {
    auto out = OpenOut(a.out);
    WriteMseCsv(rows, out);
    if (!out.flush()) throw IoError("short write to " + a.out);
  }
  return kExitOk;
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
  Common common;
  Constants constants;
  std::string p, q, p2, q2;
  double eps = 0.0;
};

int RunEstimateCommand(const EstimateArgs& a) {
  SetupCommon(a.common);
  if ((a.p2.empty()) != (a.q2.empty())) {
    throw DomainError("--p2 and --q2 go together");
  }
  SampleSplit ps{{ReadHistogram(a.p)}}, qs{{ReadHistogram(a.q)}};
  const bool split = !a.p2.empty();
  if (split) {
    ps.parts.push_back(ReadHistogram(a.p2));
    qs.parts.push_back(ReadHistogram(a.q2));
  }
  const double n = ps.parts[0].rate();
  for (const auto* s : {&ps, &qs}) {
    for (const auto& h : s->parts) {
      if (h.rate() != n) throw DomainError("histograms have different rates");
    }
  }
  EstimatorConfig c = EstimatorConfig::Synthetic(a.eps, n);
  c.split_mode = split ? SplitMode::kSplit : SplitMode::kNoSplit;
  ApplyConstants(a.constants, c);
  const auto t = Clock::now();
  const EstimateTerms terms = EstimateTermsParallel(ps, qs, c);
  Phase("estimation", Since(t));
  int counts[4] = {0, 0, 0, 0};
  for (auto l : terms.labels) ++counts[static_cast<int>(l)];
  std::cout << "plugin=" << FormatDouble(PluginEstimate(ps.parts[0],
                                                        qs.parts[0], a.eps))
            << '\n'
            << "estimate=" << FormatDouble(terms.value) << '\n'
            << "raw_sum=" << FormatDouble(terms.raw_sum) << '\n'
            << "K=" << c.degree() << '\n';
  for (int i = 0; i < 4; ++i) {
    std::cout << RegimeName(static_cast<RegimeLabel>(i)) << '=' << counts[i]
              << '\n';
  }
  return kExitOk;
}

// --- poly-table -------------------------------------------------------------

struct PolyArgs {
  Common common;
  std::vector<int> degrees;
};

int RunPolyCommand(const PolyArgs& a) {
  SetupCommon(a.common);
  for (int k : a.degrees) {
    if (k > kMaxDegree) {
      throw DomainError("degree " + std::to_string(k) + " refused: above " +
                        std::to_string(kMaxDegree) +
                        " the monomial coefficients lose all precision in "
                        "double arithmetic");
    }
    if (k < 1) throw DomainError("degrees must be at least 1");
  }
  CoeffCache& cache = CoeffCache::Default();
  if (cache.path().empty()) {
    std::cerr << "note: no --cache or $DPAUDIT_CACHE; nothing is persisted\n";
  }
  const auto t = Clock::now();
  for (int k : a.degrees) {
    const bool changed = cache.Populate(k);
    const auto abs = cache.Abs(k);
    const auto u = cache.Bivariate(BivariateTarget::kSqrtSum, k);
    const auto v = cache.Bivariate(BivariateTarget::kReluSqrtDiff, k);
    const auto h = cache.H(k);
    std::cout << "K=" << k << (changed ? " (built)" : " (cached)") << '\n'
              << "  abs  sup_error=" << FormatDouble(abs->sup_error)
              << " K*sup_error=" << FormatDouble(k * abs->sup_error) << '\n'
              << "  u    sup_error=" << FormatDouble(u->sup_error) << '\n'
              << "  v    sup_error=" << FormatDouble(v->sup_error) << '\n'
              << "  h    sup_error=" << FormatDouble(h->sup_error) << '\n';
  }
  Phase("coefficients", Since(t));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box differential privacy auditing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dpaudit 1.0.0");

  AuditArgs audit;
  auto* ca = app.add_subcommand("audit", "audit a built-in mechanism");
  AddCommon(ca, audit.common);
  AddConstants(ca, audit.constants);
  ca->add_option("--mechanism", audit.mechanism,
                 "rna-lap rna-exp rnm-lap rnm-exp histogram histogram-wrong "
                 "svt isvt1 isvt2 isvt3 tgm mtgm");
  ca->add_option("--eps0", audit.eps0, "claimed epsilon")
      ->capture_default_str();
  ca->add_option("--delta0", audit.delta0, "claimed delta (mtgm)")
      ->capture_default_str();
  ca->add_option("--bound", audit.bound, "N, trues before SVT halts")
      ->capture_default_str();
  ca->add_option("--threshold", audit.threshold, "SVT threshold")
      ->capture_default_str();
  ca->add_option("--n", audit.n, "mean sample size per side")
      ->capture_default_str();
  ca->add_option("--trials", audit.trials)->capture_default_str();
  ca->add_option("--seed", audit.seed)->capture_default_str();
  ca->add_option("--eps-grid", audit.eps_grid,
                 "comma-separated epsilons (default 0, 0.05, ..., 1)")
      ->delimiter(',');
  ca->add_option("--bin-width", audit.bin_width,
                 "bin width for real outputs (default per mechanism)");
  ca->add_option("--tolerance", audit.tolerance,
                 "excess over the claimed delta ignored as estimator bias")
      ->capture_default_str();
  ca->add_flag("--one-direction", audit.one_direction,
               "audit (D, D') only instead of both orders");
  ca->add_option("--out", audit.out, "report CSV")->capture_default_str();
  ca->add_option("--cert", audit.cert, "certificate file (default <out>.cert)");
  ca->add_option("--queries", audit.queries,
                 "built-in pairs with 5 or 10 queries (default 5)");
  ca->add_option("--categories", audit.categories,
                 "comma-separated subset of the built-in categories");
  ca->add_option("--categories-out", audit.categories_out,
                 "per-category CSV");

  MseArgs mse;
  auto* cm = app.add_subcommand("synthetic-mse",
                                "plug-in vs two-sample estimator MSE sweep");
  AddCommon(cm, mse.common);
  AddConstants(cm, mse.constants);
  cm->add_option("--dist-p", mse.dist_p, "P: uniform | zipf:<a> | point:<i>")
      ->capture_default_str();
  cm->add_option("--dist", mse.dist_q, "Q: uniform | zipf:<a> | point:<i>")
      ->capture_default_str();
  cm->add_option("--S", mse.size, "alphabet size")->capture_default_str();
  cm->add_option("--eps", mse.eps)->capture_default_str();
  cm->add_option("--n-grid", mse.n_grid)->delimiter(',');
  cm->add_option("--trials", mse.trials)->capture_default_str();
  cm->add_option("--seed", mse.seed)->capture_default_str();
  cm->add_flag("--split", mse.split,
               "use independent halves for branch choice and estimate");
  cm->add_option("--out", mse.out, "CSV path (default stdout)");

  EstimateArgs est;
  auto* ce = app.add_subcommand("estimate",
                                "estimate the divergence from histograms");
  AddCommon(ce, est.common);
  AddConstants(ce, est.constants);
  ce->add_option("--p", est.p, "histogram of P")->required();
  ce->add_option("--q", est.q, "histogram of Q")->required();
  ce->add_option("--p2", est.p2, "second independent histogram of P");
  ce->add_option("--q2", est.q2, "second independent histogram of Q");
  ce->add_option("--eps", est.eps)->required();

  PolyArgs poly;
  auto* cp = app.add_subcommand("poly-table",
                                "build or check the coefficient cache");
  AddCommon(cp, poly.common);
  cp->add_option("--K", poly.degrees, "degrees to build")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
    for (const auto& [cmd, common] :
         std::initializer_list<std::pair<CLI::App*, Common*>>{
             {ca, &audit.common}, {cm, &mse.common},
             {ce, &est.common}, {cp, &poly.common}}) {
      if (cmd->parsed() && !common->config_path.empty()) {
        ApplyConfig(*cmd, KeyValueConfig::Load(common->config_path));
      }
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (ca->parsed()) {
      const KeyValueConfig file =
          audit.common.config_path.empty()
              ? KeyValueConfig()
              : KeyValueConfig::Load(audit.common.config_path);
      return RunAuditCommand(audit, file);
    }
    if (cm->parsed()) return RunMseCommand(mse);
    if (ce->parsed()) return RunEstimateCommand(est);
    if (cp->parsed()) return RunPolyCommand(poly);
  } catch (const CLI::RequiredError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSoftware;
  }
  return kExitUsage;
}
