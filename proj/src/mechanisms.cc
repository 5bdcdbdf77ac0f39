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

#include "dpaudit/mechanisms.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "dpaudit/error.h"

namespace dpaudit {
namespace {

struct KindName {
  MechanismKind kind;
  std::string_view id;
};

constexpr KindName kKinds[] = {
    {MechanismKind::kRnaLap, "rna-lap"},
    {MechanismKind::kRnaExp, "rna-exp"},
    {MechanismKind::kRnmLap, "rnm-lap"},
    {MechanismKind::kRnmExp, "rnm-exp"},
    {MechanismKind::kHistogram, "histogram"},
    {MechanismKind::kHistogramWrongNoise, "histogram-wrong"},
    {MechanismKind::kSvt, "svt"},
    {MechanismKind::kIsvt1, "isvt1"},
    {MechanismKind::kIsvt2, "isvt2"},
    {MechanismKind::kIsvt3, "isvt3"},
    {MechanismKind::kTgm, "tgm"},
    {MechanismKind::kMtgm, "mtgm"},
};

const std::vector<int>& Answers(const QueryDatabasePair& pair, Side side) {
  return side == Side::kD ? pair.answers_d : pair.answers_dprime;
}

double Noise(MechanismKind kind, RandomStream& rng, double scale) {
  const bool exp = kind == MechanismKind::kRnaExp ||
                   kind == MechanismKind::kRnmExp;
  return exp ? SampleExponential(rng, scale) : SampleLaplace(rng, scale);
}

MechanismOutput NoisyMax(const MechanismSpec& spec, const std::vector<int>& a,
                         RandomStream& rng, bool index) {
  const double scale = 2.0 / spec.epsilon0;
  std::size_t best = 0;
  double best_v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a[i] + Noise(spec.kind, rng, scale);
    if (i == 0 || v > best_v) {  // ties keep the lower index
      best = i;
      best_v = v;
    }
  }
  return {{index ? static_cast<double>(best) : best_v}};
}

MechanismOutput Sparse(const MechanismSpec& spec, const std::vector<int>& a,
                       RandomStream& rng) {
  const double e0 = spec.epsilon0;
  double t_scale = 2.0 / e0, q_scale = 0.0;
  bool halts = true;
  switch (spec.kind) {
    case MechanismKind::kSvt:
      q_scale = 4.0 * spec.bound / e0;
      break;
    case MechanismKind::kIsvt1:
      halts = false;
      break;
    case MechanismKind::kIsvt2:
      q_scale = 2.0 / e0;
      halts = false;
      break;
    case MechanismKind::kIsvt3:
      t_scale = 4.0 / e0;
      q_scale = 4.0 / (3.0 * e0);
      break;
    default:
      throw ContractError("not a sparse-vector mechanism");
  }
  const double noisy_t = spec.threshold + SampleLaplace(rng, t_scale);
  MechanismOutput out;
  int trues = 0;
  for (int answer : a) {
    const double v = answer + (q_scale > 0.0 ? SampleLaplace(rng, q_scale) : 0);
    const bool above = v >= noisy_t;
    out.values.push_back(above ? 1.0 : 0.0);
    if (above && halts && ++trues >= spec.bound) break;
  }
  return out;
}

int SampleFromPmf(const std::vector<double>& pmf, RandomStream& rng) {
  const double u = rng.NextUniform();
  double acc = 0.0;
  for (std::size_t z = 0; z + 1 < pmf.size(); ++z) {
    acc += pmf[z];
    if (u < acc) return static_cast<int>(z);
  }
  return static_cast<int>(pmf.size()) - 1;
}

void CheckCount(int x) {
  if (x < 0 || x >= kTgmRange) {
    throw DomainError("counting-query answer must lie in {0,1,2,3}");
  }
}

}  // namespace

std::string_view MechanismId(MechanismKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.id;
  }
  return "?";
}

MechanismKind ParseMechanismKind(std::string_view id) {
  std::string norm;
  for (char c : id) {
    if (c == '_' || c == '+') c = '-';
    norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (norm == "histogram-wrong-noise" || norm == "histogramwrongnoise") {
    return MechanismKind::kHistogramWrongNoise;
  }
  for (const auto& k : kKinds) {
    if (k.id == norm) return k.kind;
  }
  throw DomainError("unknown mechanism '" + std::string(id) + "'");
}

const std::vector<MechanismKind>& AllMechanismKinds() {
  static const std::vector<MechanismKind> all = [] {
    std::vector<MechanismKind> v;
    for (const auto& k : kKinds) v.push_back(k.kind);
    return v;
  }();
  return all;
}

OutputKind OutputKindOf(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kRnaLap:
    case MechanismKind::kRnaExp:
      return OutputKind::kIndex;
    case MechanismKind::kRnmLap:
    case MechanismKind::kRnmExp:
      return OutputKind::kReal;
    case MechanismKind::kHistogram:
    case MechanismKind::kHistogramWrongNoise:
      return OutputKind::kRealVector;
    case MechanismKind::kSvt:
    case MechanismKind::kIsvt1:
    case MechanismKind::kIsvt2:
    case MechanismKind::kIsvt3:
      return OutputKind::kBoolVector;
    case MechanismKind::kTgm:
    case MechanismKind::kMtgm:
      return OutputKind::kInteger;
  }
  return OutputKind::kInteger;
}

double MechanismSpec::ClaimedDelta() const {
  return kind == MechanismKind::kMtgm ? delta0 : 0.0;
}

void MechanismSpec::Validate() const {
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) {
    throw DomainError("eps0 must be positive and finite");
  }
  if (!(delta0 >= 0.0 && delta0 <= 1.0)) {
    throw DomainError("delta0 must lie in [0, 1]");
  }
  if (bound < 1) throw DomainError("bound N must be at least 1");
  if (!std::isfinite(threshold)) throw DomainError("threshold must be finite");
}

MechanismSpec MechanismSpec::FromConfig(const KeyValueConfig& config) {
  MechanismSpec s;
  auto id = config.Get("mechanism");
  if (!id) throw DomainError("config has no 'mechanism' key");
  s.kind = ParseMechanismKind(*id);
  if (auto v = config.GetDouble("eps0")) s.epsilon0 = *v;
  if (auto v = config.GetDouble("delta0")) s.delta0 = *v;
  if (auto v = config.GetInt("bound")) s.bound = static_cast<int>(*v);
  if (auto v = config.GetDouble("threshold")) s.threshold = *v;
  s.Validate();
  return s;
}

QueryDatabasePair QueryDatabasePair::Swapped() const {
  return {category + " (swapped)", answers_dprime, answers_d};
}

std::vector<QueryDatabasePair> StandardPairs(int query_count) {
  if (query_count != 5 && query_count != 10) {
    throw DomainError("built-in categories exist for 5 or 10 queries");
  }
  const int m = query_count;
  const std::vector<int> ones(m, 1);
  auto with = [&](int first, int rest) {
    std::vector<int> v(m, rest);
    v[0] = first;
    return v;
  };
  // Leading zeros then the given tail value; 3 of 5 and 2 of 5 zeros scale
  // to 5 and 4 of 10.
  auto zeros_then = [&](int zeros, int tail) {
    std::vector<int> v(m, tail);
    std::fill(v.begin(), v.begin() + zeros, 0);
    return v;
  };
  return {
      {"One Above", ones, with(2, 1)},
      {"One Below", ones, with(0, 1)},
      {"One Above Rest Below", ones, with(2, 0)},
      {"One Below Rest Above", ones, with(0, 2)},
      {"Half Half", ones, zeros_then((m + 1) / 2, 2)},
      {"All Above & All Below", ones, std::vector<int>(m, 2)},
      {"X Shape", ones, zeros_then(2 * m / 5, 1)},
  };
}

QueryDatabasePair StandardPair(std::string_view category, int query_count) {
  for (auto& p : StandardPairs(query_count)) {
    if (p.category == category) return p;
  }
  throw DomainError("unknown category '" + std::string(category) + "'");
}

std::vector<QueryDatabasePair> DefaultPairsFor(MechanismKind kind,
                                               int query_count) {
  switch (kind) {
    case MechanismKind::kHistogram:
    case MechanismKind::kHistogramWrongNoise:
      return {StandardPair("One Above", query_count),
              StandardPair("One Below", query_count)};
    case MechanismKind::kTgm:
    case MechanismKind::kMtgm:
      return {{"One Above", {1}, {2}}, {"One Below", {1}, {0}}};
    default:
      return StandardPairs(query_count);
  }
}

std::vector<QueryDatabasePair> PairsFromConfig(const KeyValueConfig& config,
                                               MechanismKind kind) {
  std::vector<QueryDatabasePair> pairs;
  for (const auto& [key, value] : config.values()) {
    if (key.rfind("pair.", 0) != 0) continue;
    const auto sides = SplitList(value, ';');
    if (sides.size() != 2) {
      throw DomainError("config key '" + key + "': expected 'D ; D''");
    }
    QueryDatabasePair p;
    p.category = key.substr(5);
    for (int s = 0; s < 2; ++s) {
      auto& out = s == 0 ? p.answers_d : p.answers_dprime;
      for (const auto& f : SplitList(sides[s], ',')) {
        try {
          out.push_back(std::stoi(f));
        } catch (const std::exception&) {
          throw DomainError("config key '" + key + "': bad answer '" + f +
                            "'");
        }
      }
    }
    pairs.push_back(std::move(p));
  }
  if (!pairs.empty()) return pairs;
  int m = 5;
  if (auto q = config.GetInt("queries")) m = static_cast<int>(*q);
  auto all = DefaultPairsFor(kind, m);
  if (auto cats = config.Get("categories")) {
    std::vector<QueryDatabasePair> chosen;
    for (const auto& name : SplitList(*cats, ',')) {
      auto it = std::find_if(all.begin(), all.end(), [&](const auto& p) {
        return p.category == name;
      });
      if (it == all.end()) {
        throw DomainError("category '" + name + "' is not available for " +
                          std::string(MechanismId(kind)));
      }
      chosen.push_back(*it);
    }
    return chosen;
  }
  return all;
}

void CheckPairFor(const MechanismSpec& spec, const QueryDatabasePair& pair) {
  if (pair.answers_d.size() != pair.answers_dprime.size() ||
      pair.answers_d.empty()) {
    throw DimensionError("pair '" + pair.category +
                         "': answer vectors must be non-empty and equal length");
  }
  switch (spec.kind) {
    case MechanismKind::kHistogram:
    case MechanismKind::kHistogramWrongNoise: {
      int differing = 0;
      for (std::size_t i = 0; i < pair.answers_d.size(); ++i) {
        const int d = std::abs(pair.answers_d[i] - pair.answers_dprime[i]);
        if (d > 1) differing += 2;
        else if (d == 1) ++differing;
      }
      if (differing > 1) {
        throw DomainError("histogram pairs may differ in one coordinate by at "
                          "most 1; '" + pair.category + "' does not");
      }
      break;
    }
    case MechanismKind::kTgm:
    case MechanismKind::kMtgm:
      if (pair.answers_d.size() != 1) {
        throw DomainError("tgm/mtgm take a single counting query");
      }
      CheckCount(pair.answers_d[0]);
      CheckCount(pair.answers_dprime[0]);
      if (std::abs(pair.answers_d[0] - pair.answers_dprime[0]) > 1) {
        throw DomainError("counting-query answers must be adjacent");
      }
      break;
    default:
      break;
  }
}

MechanismOutput SampleMechanism(const MechanismSpec& spec,
                                const QueryDatabasePair& pair, Side side,
                                RandomStream& rng) {
  const auto& a = Answers(pair, side);
  switch (spec.kind) {
    case MechanismKind::kRnaLap:
    case MechanismKind::kRnaExp:
      return NoisyMax(spec, a, rng, true);
    case MechanismKind::kRnmLap:
    case MechanismKind::kRnmExp:
      return NoisyMax(spec, a, rng, false);
    case MechanismKind::kHistogram:
    case MechanismKind::kHistogramWrongNoise: {
      const double scale = spec.kind == MechanismKind::kHistogram
                               ? 1.0 / spec.epsilon0
                               : spec.epsilon0;
      MechanismOutput out;
      out.values.reserve(a.size());
      for (int v : a) out.values.push_back(v + SampleLaplace(rng, scale));
      return out;
    }
    case MechanismKind::kSvt:
    case MechanismKind::kIsvt1:
    case MechanismKind::kIsvt2:
    case MechanismKind::kIsvt3:
      return Sparse(spec, a, rng);
    case MechanismKind::kTgm:
      return {{static_cast<double>(
          SampleFromPmf(TgmPmf(a.at(0), spec.epsilon0), rng))}};
    case MechanismKind::kMtgm:
      if (rng.NextUniform() < spec.delta0) {
        return {{static_cast<double>(a.at(0))}};
      }
      return {{static_cast<double>(
          SampleFromPmf(TgmPmf(a.at(0), spec.epsilon0), rng))}};
  }
  throw ContractError("unhandled mechanism");
}

MechanismOutput SampleMechanism(const MechanismSpec& spec,
                                const QueryDatabasePair& pair, Side side,
                                std::uint64_t seed) {
  RandomStream rng(seed);
  return SampleMechanism(spec, pair, side, rng);
}

std::vector<double> TgmPmf(int x, double epsilon0) {
  CheckCount(x);
  if (!(epsilon0 > 0.0)) throw DomainError("eps0 must be positive");
  const double alpha = std::exp(-epsilon0);
  const int top = kTgmRange - 1;
  std::vector<double> p(kTgmRange);
  p[0] = std::pow(alpha, x) / (1.0 + alpha);
  p[top] = std::pow(alpha, top - x) / (1.0 + alpha);
  for (int z = 1; z < top; ++z) {
    p[z] = (1.0 - alpha) / (1.0 + alpha) * std::pow(alpha, std::abs(z - x));
  }
  return p;
}

std::vector<double> MtgmPmf(int x, double epsilon0, double delta0) {
  if (!(delta0 >= 0.0 && delta0 <= 1.0)) {
    throw DomainError("delta0 must lie in [0, 1]");
  }
  auto p = TgmPmf(x, epsilon0);
  for (double& v : p) v *= 1.0 - delta0;
  p[x] += delta0;
  return p;
}

double DefaultBinWidth(MechanismKind kind) {
  switch (OutputKindOf(kind)) {
    case OutputKind::kReal:
      return 0.1;
    case OutputKind::kRealVector:
      // Finer bins give ~n distinct 5-tuples under Lap(2) noise.
      return 2.0;
    default:
      return 0.0;
  }
}

SymbolDictionary::SymbolDictionary(double bin_width) : bin_width_(bin_width) {
  if (!(bin_width >= 0.0) || !std::isfinite(bin_width)) {
    throw DomainError("bin width must be finite and non-negative");
  }
}

std::vector<std::int64_t> SymbolDictionary::MakeKey(
    const MechanismOutput& output) const {
  std::vector<std::int64_t> key;
  key.reserve(output.values.size());
  for (double v : output.values) {
    const double b = bin_width_ > 0.0 ? std::floor(v / bin_width_)
                                      : std::round(v);
    key.push_back(static_cast<std::int64_t>(b));
  }
  return key;
}

std::size_t SymbolDictionary::KeyHash::operator()(
    const std::vector<std::int64_t>& k) const {
  std::uint64_t h = k.size();
  for (std::int64_t v : k) {
    h = SplitMix64(h ^ static_cast<std::uint64_t>(v));
  }
  return static_cast<std::size_t>(h);
}

std::size_t SymbolDictionary::Symbolize(const MechanismOutput& output) {
  auto key = MakeKey(output);
  auto [it, inserted] = ids_.try_emplace(key, keys_.size());
  if (inserted) keys_.push_back(std::move(key));
  return it->second;
}

std::size_t SymbolDictionary::Find(const MechanismOutput& output) const {
  auto it = ids_.find(MakeKey(output));
  return it == ids_.end() ? keys_.size() : it->second;
}

std::string SymbolDictionary::Describe(std::size_t id) const {
  std::ostringstream os;
  const auto& k = keys_.at(id);
  os << '[';
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) os << ' ';
    if (bin_width_ > 0.0) {
      os << k[i] * bin_width_ << ".." << (k[i] + 1) * bin_width_;
    } else {
      os << k[i];
    }
  }
  os << ']';
  return os.str();
}

}  // namespace dpaudit
