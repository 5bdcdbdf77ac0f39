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

// Mechanisms under audit, the neighbouring query-answer pairs they are run
// on, and the mapping from raw outputs to dense symbol ids.
//
// Noise parameterisations (all Laplace/exponential arguments are scales):
//
//   rna-lap / rna-exp   answers + Lap(2/e0) or Exp(2/e0), return argmax
//   rnm-lap / rnm-exp   same noise, return the max value itself
//   histogram           answers + Lap(1/e0) per coordinate
//   histogram-wrong     answers + Lap(e0) per coordinate
//   svt                 threshold T + Lap(2/e0), queries + Lap(4N/e0),
//                       halts after N trues
//   isvt1               threshold + Lap(2/e0), queries noiseless, no halt
//   isvt2               threshold + Lap(2/e0), queries + Lap(2/e0), no halt
//   isvt3               threshold + Lap(4/e0), queries + Lap(4/(3 e0)),
//                       halts after N trues; really (1+6N) e0 / 4 private
//   tgm                 truncated geometric on {0,1,2,3}, alpha = e^-e0
//   mtgm                true answer w.p. d0, otherwise tgm

#ifndef DPAUDIT_MECHANISMS_H_
#define DPAUDIT_MECHANISMS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dpaudit/config.h"
#include "dpaudit/rng.h"

namespace dpaudit {

enum class MechanismKind {
  kRnaLap,
  kRnaExp,
  kRnmLap,
  kRnmExp,
  kHistogram,
  kHistogramWrongNoise,
  kSvt,
  kIsvt1,
  kIsvt2,
  kIsvt3,
  kTgm,
  kMtgm,
};

inline constexpr int kTgmRange = 4;  // outputs {0, 1, 2, 3}

std::string_view MechanismId(MechanismKind kind);
// Accepts the ids above, case-insensitively, with '_' or '+' for '-'
// ("RNA_Lap", "rna+lap").
MechanismKind ParseMechanismKind(std::string_view id);
const std::vector<MechanismKind>& AllMechanismKinds();

enum class OutputKind { kIndex, kReal, kRealVector, kBoolVector, kInteger };
OutputKind OutputKindOf(MechanismKind kind);

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kRnaLap;
  double epsilon0 = 0.5;
  double delta0 = 0.0;   // mtgm only
  int bound = 1;         // N, svt family
  double threshold = 1.0;

  // delta0 for mtgm, 0 for everything else.
  double ClaimedDelta() const;
  void Validate() const;
  // Keys: mechanism, eps0, delta0, bound, threshold.
  static MechanismSpec FromConfig(const KeyValueConfig& config);
};

struct QueryDatabasePair {
  std::string category;
  std::vector<int> answers_d;
  std::vector<int> answers_dprime;

  std::size_t query_count() const { return answers_d.size(); }
  // The same pair with D and D' exchanged; category gets a " (swapped)"
  // suffix.
  QueryDatabasePair Swapped() const;
};

// The seven built-in categories for m in {5, 10}: D is all ones.
std::vector<QueryDatabasePair> StandardPairs(int query_count = 5);
QueryDatabasePair StandardPair(std::string_view category,
                               int query_count = 5);
// The categories a mechanism is audited on by default: histogram and the
// single-count mechanisms use One Above and One Below only.
std::vector<QueryDatabasePair> DefaultPairsFor(MechanismKind kind,
                                               int query_count = 5);
// "pair.<name> = a,b,c ; a',b',c'" entries, or the defaults when none.
std::vector<QueryDatabasePair> PairsFromConfig(const KeyValueConfig& config,
                                               MechanismKind kind);

// Throws DomainError when the pair cannot be fed to the mechanism.
void CheckPairFor(const MechanismSpec& spec, const QueryDatabasePair& pair);

enum class Side { kD, kDprime };

struct MechanismOutput {
  // Index, real, vector or booleans (0/1) depending on OutputKind. SVT
  // outputs have the length at which the mechanism halted.
  std::vector<double> values;
};

MechanismOutput SampleMechanism(const MechanismSpec& spec,
                                const QueryDatabasePair& pair, Side side,
                                RandomStream& rng);
MechanismOutput SampleMechanism(const MechanismSpec& spec,
                                const QueryDatabasePair& pair, Side side,
                                std::uint64_t seed);

// Exact output pmfs of the single-count mechanisms for true answer x.
std::vector<double> TgmPmf(int x, double epsilon0);
std::vector<double> MtgmPmf(int x, double epsilon0, double delta0);

// Bin width 0 means outputs are already discrete.
double DefaultBinWidth(MechanismKind kind);

// Raw output <-> dense id. Reals are binned as floor(v / w) with the anchor
// at 0. One dictionary is shared by both sides of an audit.
class SymbolDictionary {
 public:
  explicit SymbolDictionary(double bin_width = 0.0);

  std::size_t Symbolize(const MechanismOutput& output);
  // Id of a key already seen, or size() when unseen.
  std::size_t Find(const MechanismOutput& output) const;
  // Binned coordinates of symbol `id`.
  const std::vector<std::int64_t>& Key(std::size_t id) const {
    return keys_[id];
  }
  std::string Describe(std::size_t id) const;
  std::size_t size() const { return keys_.size(); }
  double bin_width() const { return bin_width_; }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& k) const;
  };
  std::vector<std::int64_t> MakeKey(const MechanismOutput& output) const;

  double bin_width_;
  std::unordered_map<std::vector<std::int64_t>, std::size_t, KeyHash> ids_;
  std::vector<std::vector<std::int64_t>> keys_;
};

}  // namespace dpaudit

#endif  // DPAUDIT_MECHANISMS_H_
