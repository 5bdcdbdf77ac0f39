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

// Poissonized sampling. A budget n draws N ~ Poi(n) samples and divides the
// resulting counts by n (not by N); the per-symbol values are then
// independent Poi(n q_i) / n, the maximum-likelihood estimate of Q, and need
// not sum to one.

#ifndef DPAUDIT_SAMPLING_H_
#define DPAUDIT_SAMPLING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dpaudit/divergence.h"
#include "dpaudit/rng.h"

namespace dpaudit {

// Draws one symbol id per call.
using SymbolSampler = std::function<std::size_t(RandomStream&)>;

SymbolSampler MakeDistributionSampler(const Distribution& dist);

class EmpiricalHistogram {
 public:
  EmpiricalHistogram(double rate_n, std::vector<std::int64_t> counts);

  static EmpiricalHistogram FromSymbols(double rate_n,
                                        std::span<const std::size_t> symbols);

  double rate() const { return rate_; }
  // One past the largest symbol id with storage; ids beyond it count as 0.
  std::size_t size() const { return counts_.size(); }
  std::int64_t count(std::size_t symbol) const {
    return symbol < counts_.size() ? counts_[symbol] : 0;
  }
  // count / n.
  double value(std::size_t symbol) const {
    return static_cast<double>(count(symbol)) / rate_;
  }
  std::int64_t total() const;
  std::span<const std::int64_t> counts() const { return counts_; }
  // Dense value vector padded with zeros to `size` entries.
  std::vector<double> Values(std::size_t size) const;

  // Text form: a "n=<rate>" line, then "<symbol_id>,<count>" for every
  // non-zero count in increasing id order.
  void Write(std::ostream& out) const;
  std::string ToString() const;
  static EmpiricalHistogram Read(std::istream& in);

  friend bool operator==(const EmpiricalHistogram&,
                         const EmpiricalHistogram&) = default;

 private:
  double rate_;
  std::vector<std::int64_t> counts_;
};

struct SampleSplit {
  std::vector<EmpiricalHistogram> parts;
};

// Draws N ~ Poi(n) and then N samples from `source`, all from `rng`.
EmpiricalHistogram PoissonizedHistogram(const SymbolSampler& source, double n,
                                        RandomStream rng);
EmpiricalHistogram PoissonizedHistogram(const SymbolSampler& source, double n,
                                        std::uint64_t seed);

// `parts` independent Poissonized histograms at the same rate. Part 0 uses
// `rng` itself, so parts == 1 reproduces PoissonizedHistogram; part j > 0
// uses rng.Substream(j).
SampleSplit SplitSamples(const SymbolSampler& source, double n, int parts,
                         RandomStream rng);

}  // namespace dpaudit

#endif  // DPAUDIT_SAMPLING_H_
