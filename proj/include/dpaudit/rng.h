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

// Deterministic random streams built on the Philox4x32-10 counter-based
// generator. A stream is identified by (seed, stream id); substreams derive
// new ids by hashing, so independent trials, sample splits and databases each
// get their own reproducible sequence without sharing state.

#ifndef DPAUDIT_RNG_H_
#define DPAUDIT_RNG_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dpaudit {

std::uint64_t SplitMix64(std::uint64_t x);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  // An independent stream keyed by this stream's identity and `id`. Does not
  // advance this stream.
  RandomStream Substream(std::uint64_t id) const;

  std::uint64_t NextU64();
  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double NextOpenUniform();
  // Uniform on [0, 1).
  double NextUniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void Refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int next_word_ = 4;
};

// Poisson(mean). Inversion below mean 10, Hormann's PTRS transformed
// rejection above.
std::int64_t SamplePoisson(RandomStream& rng, double mean);
// Laplace(0, scale), scale > 0.
double SampleLaplace(RandomStream& rng, double scale);
// Exponential with the given mean (scale), scale > 0.
double SampleExponential(RandomStream& rng, double scale);

// Walker/Vose alias table for O(1) categorical draws.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);
  std::size_t Sample(RandomStream& rng) const;
  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace dpaudit

#endif  // DPAUDIT_RNG_H_
