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

#ifndef DPAUDIT_NUMERIC_H_
#define DPAUDIT_NUMERIC_H_

#include <charconv>
#include <cstddef>
#include <span>
#include <string>

namespace dpaudit {

// Pairwise (cascade) summation with a fixed split order, so a given input
// always reduces to the same bits regardless of how it was produced.
inline double PairwiseSum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

inline double PositivePart(double x) { return x > 0.0 ? x : 0.0; }

inline double Clamp01(double x) {
  if (!(x > 0.0)) return 0.0;  // also maps NaN to 0
  return x < 1.0 ? x : 1.0;
}

// Shortest text that reads back to the same double.
inline std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace dpaudit

#endif  // DPAUDIT_NUMERIC_H_
