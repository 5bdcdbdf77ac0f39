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

// Best and near-best polynomial approximations used by the estimators:
//
//   * minimax approximation of |t| on [-1, 1] (Remez exchange),
//   * [b - y]^+ on [0, 1] through [c]^+ = (c + |c|) / 2,
//   * filtered tensor Chebyshev expansions of sqrt(x) + sqrt(y) and
//     [sqrt(x) - sqrt(y)]^+ on the unit square, and their product.
//
// Everything is kept twice: Chebyshev coefficients for stable evaluation and
// monomial coefficients for the unbiased estimators, which need powers.

#ifndef DPAUDIT_POLY_H_
#define DPAUDIT_POLY_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpaudit {

// Above this degree double precision is hopeless for monomial coefficients.
inline constexpr int kMaxDegree = 60;

struct UniPolyApprox {
  int degree = 0;
  std::vector<double> coeffs;  // monomial, in the interval's own variable
  std::vector<double> cheb;    // Chebyshev, in the variable mapped to [-1, 1]
  double lo = -1.0;
  double hi = 1.0;
  double sup_error = 0.0;

  // Clenshaw on `cheb`.
  double Evaluate(double x) const;
  // Horner on `coeffs`.
  double EvaluateMonomial(double x) const;
};

struct BiPolyApprox {
  int degree = 0;  // per-variable degree of coeffs
  // Row-major (degree+1)^2, entry [i * (degree+1) + j] multiplies x^i y^j.
  std::vector<double> coeffs;
  // Same layout over T_i(2x-1) T_j(2y-1).
  std::vector<double> cheb;
  double sup_error = 0.0;

  double coeff(int i, int j) const { return coeffs[i * (degree + 1) + j]; }
  double Evaluate(double x, double y) const;
  double EvaluateMonomial(double x, double y) const;
};

enum class BivariateTarget { kSqrtSum, kReluSqrtDiff };

std::string_view BivariateTargetId(BivariateTarget target);
// "sqrt_sum" or "relu_sqrt_diff"; anything else is a DomainError.
BivariateTarget ParseBivariateTarget(std::string_view id);

struct RemezOptions {
  int max_iterations = 200;
  double tolerance = 1e-12;      // relative spread of the levelled error
  double accept_tolerance = 1e-9;  // still accepted when the cap is hit
};

// Minimax polynomial of degree <= K for f on [lo, hi]. `kinks` lists points
// where f is not smooth; they are added to the search grid.
UniPolyApprox Remez(const std::function<double(double)>& f, int degree,
                    double lo, double hi, std::span<const double> kinks = {},
                    const RemezOptions& options = {});

// Minimax approximation of |t| on [-1, 1]; odd coefficients are zero.
UniPolyApprox RemezAbs(int degree);

// Approximation of [b - y]^+ on [0, 1]: half the minimax approximation of
// |y - b| plus the exact linear part (b - y) / 2.
UniPolyApprox ShiftedReluApprox(double b, int degree);

// Lowpass-filtered tensor Chebyshev approximation of degree K per variable.
BiPolyApprox ChebBivariate(BivariateTarget target, int degree);

// u * v - u(0,0) v(0,0); degree 2K per variable, zero at the origin.
BiPolyApprox H2K(const BiPolyApprox& u, const BiPolyApprox& v);

// Coefficients of sum_k c_k T_k(s), s = (2x - lo - hi) / (hi - lo), as a
// polynomial in x. Done in 50-digit arithmetic.
std::vector<double> ChebyshevToMonomial(std::span<const double> cheb,
                                        double lo, double hi);

// Uniform error of the stored approximation on the sampling grid used for
// the bivariate targets, measured against f. `points` per axis.
double BivariateSupError(const BiPolyApprox& approx,
                         const std::function<double(double, double)>& f,
                         int points);

// Table of approximations keyed by (function id, degree), optionally backed
// by a text file. Entries are built on first use and then immutable; the
// first caller for a key builds it while others wait.
class CoeffCache {
 public:
  static constexpr std::string_view kVersion = "polycache v1";

  // Empty path keeps everything in memory.
  explicit CoeffCache(std::filesystem::path path = {});

  std::shared_ptr<const UniPolyApprox> Abs(int degree);
  std::shared_ptr<const BiPolyApprox> Bivariate(BivariateTarget target,
                                                int degree);
  // h_{2K} built from u_K and v_K.
  std::shared_ptr<const BiPolyApprox> H(int degree);
  // Not persisted: the kink location is a continuous parameter.
  std::shared_ptr<const UniPolyApprox> ShiftedRelu(double b, int degree);

  // Builds abs, u, v and h for the degree; writes the file if anything was
  // missing. Returns true if the file changed.
  bool Populate(int degree);

  const std::filesystem::path& path() const { return path_; }

  // Process-wide instance. Uses $DPAUDIT_CACHE when set, else memory only.
  static CoeffCache& Default();
  // Replaces the process-wide instance's backing file.
  static void SetDefaultPath(std::filesystem::path path);

 private:
  struct Key {
    std::string id;
    int degree;
    double param;
    auto operator<=>(const Key&) const = default;
  };

  void LoadLocked();
  void SaveLocked() const;

  std::filesystem::path path_;
  mutable std::mutex mu_;
  bool loaded_ = false;
  std::map<Key, std::shared_ptr<const UniPolyApprox>> uni_;
  std::map<Key, std::shared_ptr<const BiPolyApprox>> bi_;
};

}  // namespace dpaudit

#endif  // DPAUDIT_POLY_H_
