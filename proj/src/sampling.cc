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

#include "dpaudit/sampling.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "dpaudit/error.h"
#include "dpaudit/numeric.h"

namespace dpaudit {
namespace {

void CheckRate(double n) {
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DomainError("sample budget n must be positive and finite");
  }
}

}  // namespace

SymbolSampler MakeDistributionSampler(const Distribution& dist) {
  auto table = std::make_shared<const AliasTable>(dist.probs());
  return [table](RandomStream& rng) { return table->Sample(rng); };
}

EmpiricalHistogram::EmpiricalHistogram(double rate_n,
                                       std::vector<std::int64_t> counts)
    : rate_(rate_n), counts_(std::move(counts)) {
  CheckRate(rate_);
  for (std::int64_t c : counts_) {
    if (c < 0) throw DomainError("histogram counts must be non-negative");
  }
}

EmpiricalHistogram EmpiricalHistogram::FromSymbols(
    double rate_n, std::span<const std::size_t> symbols) {
  std::vector<std::int64_t> counts;
  for (std::size_t s : symbols) {
    if (s >= counts.size()) counts.resize(s + 1, 0);
    ++counts[s];
  }
  return EmpiricalHistogram(rate_n, std::move(counts));
}

std::int64_t EmpiricalHistogram::total() const {
  std::int64_t t = 0;
  for (std::int64_t c : counts_) t += c;
  return t;
}

std::vector<double> EmpiricalHistogram::Values(std::size_t size) const {
  std::vector<double> v(size, 0.0);
  for (std::size_t i = 0; i < size && i < counts_.size(); ++i) v[i] = value(i);
  return v;
}

void EmpiricalHistogram::Write(std::ostream& out) const {
  out << "n=" << FormatDouble(rate_) << '\n';
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] != 0) out << i << ',' << counts_[i] << '\n';
  }
}

std::string EmpiricalHistogram::ToString() const {
  std::ostringstream os;
  Write(os);
  return os.str();
}

EmpiricalHistogram EmpiricalHistogram::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("n=", 0) != 0) {
    throw IoError("histogram: missing 'n=<rate>' header");
  }
  double rate = 0.0;
  {
    const char* b = line.data() + 2;
    const char* e = line.data() + line.size();
    auto res = std::from_chars(b, e, rate);
    if (res.ec != std::errc() || res.ptr != e) {
      throw IoError("histogram: bad rate '" + line + "'");
    }
  }
  std::vector<std::int64_t> counts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::size_t id = 0;
    std::int64_t count = 0;
    const char* e = line.data() + line.size();
    bool ok = comma != std::string::npos;
    if (ok) {
      auto r1 = std::from_chars(line.data(), line.data() + comma, id);
      auto r2 = std::from_chars(line.data() + comma + 1, e, count);
      ok = r1.ec == std::errc() && r1.ptr == line.data() + comma &&
           r2.ec == std::errc() && r2.ptr == e && count >= 0;
    }
    if (!ok) throw IoError("histogram: bad row '" + line + "'");
    if (id >= counts.size()) counts.resize(id + 1, 0);
    counts[id] += count;
  }
  return EmpiricalHistogram(rate, std::move(counts));
}

EmpiricalHistogram PoissonizedHistogram(const SymbolSampler& source, double n,
                                        RandomStream rng) {
  CheckRate(n);
  const std::int64_t draws = SamplePoisson(rng, n);
  std::vector<std::int64_t> counts;
  for (std::int64_t k = 0; k < draws; ++k) {
    const std::size_t s = source(rng);
    if (s >= counts.size()) counts.resize(s + 1, 0);
    ++counts[s];
  }
  return EmpiricalHistogram(n, std::move(counts));
}

EmpiricalHistogram PoissonizedHistogram(const SymbolSampler& source, double n,
                                        std::uint64_t seed) {
  return PoissonizedHistogram(source, n, RandomStream(seed));
}

SampleSplit SplitSamples(const SymbolSampler& source, double n, int parts,
                         RandomStream rng) {
  if (parts < 1) throw DomainError("split needs at least one part");
  CheckRate(n);
  SampleSplit split;
  split.parts.reserve(static_cast<std::size_t>(parts));
  for (int j = 0; j < parts; ++j) {
    split.parts.push_back(PoissonizedHistogram(
        source, n, j == 0 ? rng : rng.Substream(static_cast<std::uint64_t>(j))));
  }
  return split;
}

}  // namespace dpaudit
