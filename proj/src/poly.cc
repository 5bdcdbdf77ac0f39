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

#include "dpaudit/poly.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dpaudit/error.h"
#include "dpaudit/numeric.h"

namespace dpaudit {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

void CheckDegree(int degree, int min_degree) {
  if (degree < min_degree) {
    throw DomainError("polynomial degree " + std::to_string(degree) +
                      " is below " + std::to_string(min_degree));
  }
  if (degree > kMaxDegree) {
    throw DomainError("polynomial degree " + std::to_string(degree) +
                      " exceeds " + std::to_string(kMaxDegree) +
                      "; monomial coefficients are not representable in "
                      "double precision beyond that");
  }
}

double Clenshaw(std::span<const double> c, double s) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    const double t = 2.0 * s * b1 - b2 + c[k];
    b2 = b1;
    b1 = t;
  }
  return s * b1 - b2 + c[0];
}

// T_0..T_d at s.
void ChebRow(double s, int d, double* out) {
  out[0] = 1.0;
  if (d >= 1) out[1] = s;
  for (int k = 2; k <= d; ++k) out[k] = 2.0 * s * out[k - 1] - out[k - 2];
}

// Row a holds the monomial coefficients of T_a(alpha x + beta).
std::vector<std::vector<Big>> ChebToMonoMatrix(int degree, double lo,
                                               double hi) {
  const Big width = Big(hi) - Big(lo);
  const Big alpha = Big(2) / width;
  const Big beta = -(Big(lo) + Big(hi)) / width;
  std::vector<std::vector<Big>> t(degree + 1,
                                  std::vector<Big>(degree + 1, Big(0)));
  t[0][0] = 1;
  if (degree >= 1) {
    t[1][0] = beta;
    t[1][1] = alpha;
  }
  for (int k = 2; k <= degree; ++k) {
    for (int i = 0; i <= k; ++i) {
      Big v = -t[k - 2][i];
      if (i < k) v += 2 * beta * t[k - 1][i];
      if (i > 0) v += 2 * alpha * t[k - 1][i - 1];
      t[k][i] = v;
    }
  }
  return t;
}

struct Extremum {
  double s;
  double e;
};

double GoldenMax(const std::function<double(double)>& g, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 90 && b - a > 1e-16; ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  return gc > gd ? c : d;
}

double ParseDouble(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("polycache: bad number '" + std::string(s) + "'");
  }
  return v;
}

int ParseInt(std::string_view s) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("polycache: bad integer '" + std::string(s) + "'");
  }
  return v;
}

double SqrtSum(double x, double y) { return std::sqrt(x) + std::sqrt(y); }
double ReluSqrtDiff(double x, double y) {
  return std::max(std::sqrt(x) - std::sqrt(y), 0.0);
}
double ReluDiff(double x, double y) { return std::max(x - y, 0.0); }

}  // namespace

double UniPolyApprox::Evaluate(double x) const {
  const double s = (2.0 * x - lo - hi) / (hi - lo);
  return Clenshaw(cheb, s);
}

double UniPolyApprox::EvaluateMonomial(double x) const {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
  return v;
}

double BiPolyApprox::Evaluate(double x, double y) const {
  const int d = degree;
  std::vector<double> tx(d + 1), ty(d + 1);
  ChebRow(2.0 * x - 1.0, d, tx.data());
  ChebRow(2.0 * y - 1.0, d, ty.data());
  double v = 0.0;
  for (int i = 0; i <= d; ++i) {
    double row = 0.0;
    for (int j = 0; j <= d; ++j) row += cheb[i * (d + 1) + j] * ty[j];
    v += tx[i] * row;
  }
  return v;
}

double BiPolyApprox::EvaluateMonomial(double x, double y) const {
  const int d = degree;
  double v = 0.0;
  for (int i = d; i >= 0; --i) {
    double row = 0.0;
    for (int j = d; j >= 0; --j) row = row * y + coeffs[i * (d + 1) + j];
    v = v * x + row;
  }
  return v;
}

std::string_view BivariateTargetId(BivariateTarget target) {
  return target == BivariateTarget::kSqrtSum ? "sqrt_sum" : "relu_sqrt_diff";
}

BivariateTarget ParseBivariateTarget(std::string_view id) {
  if (id == "sqrt_sum") return BivariateTarget::kSqrtSum;
  if (id == "relu_sqrt_diff") return BivariateTarget::kReluSqrtDiff;
  throw DomainError("unknown bivariate target '" + std::string(id) + "'");
}

std::vector<double> ChebyshevToMonomial(std::span<const double> cheb,
                                        double lo, double hi) {
  if (cheb.empty()) return {};
  const int d = static_cast<int>(cheb.size()) - 1;
  const auto t = ChebToMonoMatrix(d, lo, hi);
  std::vector<double> out(d + 1);
  for (int i = 0; i <= d; ++i) {
    Big v = 0;
    for (int a = i; a <= d; ++a) v += Big(cheb[a]) * t[a][i];
    out[i] = static_cast<double>(v);
  }
  return out;
}

UniPolyApprox Remez(const std::function<double(double)>& f, int degree,
                    double lo, double hi, std::span<const double> kinks,
                    const RemezOptions& options) {
  CheckDegree(degree, 0);
  if (!(hi > lo)) throw DomainError("Remez: empty interval");
  const int n = degree + 2;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  auto fs = [&](double s) { return f(mid + half * s); };

  // Search grid on [-1, 1]: cosine-spaced for the endpoint clustering,
  // uniform for the interior, plus the kinks.
  const int g = 48 * n;
  std::vector<double> grid;
  grid.reserve(2 * g + 2 + kinks.size());
  for (int j = 0; j <= g; ++j) {
    grid.push_back(-std::cos(std::numbers::pi * j / g));
    grid.push_back(-1.0 + 2.0 * j / g);
  }
  for (double k : kinks) {
    const double s = (k - mid) / half;
    if (s > -1.0 && s < 1.0) grid.push_back(s);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> fgrid(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) fgrid[i] = fs(grid[i]);
  double fscale = 0.0;
  for (double v : fgrid) fscale = std::max(fscale, std::abs(v));
  if (fscale == 0.0) fscale = 1.0;

  std::vector<double> ref(n);
  for (int i = 0; i < n; ++i) {
    ref[i] = -std::cos(std::numbers::pi * i / (n - 1));
  }

  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd rhs(n);
  std::vector<double> c(degree + 1);
  std::vector<double> row(degree + 1);
  double level = 0.0, spread = 1.0, sup = 0.0;
  int iter = 0;
  for (;; ++iter) {
    for (int i = 0; i < n; ++i) {
      ChebRow(ref[i], degree, row.data());
      for (int k = 0; k <= degree; ++k) a(i, k) = row[k];
      a(i, n - 1) = (i % 2 == 0) ? 1.0 : -1.0;
      rhs(i) = fs(ref[i]);
    }
    const Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
    for (int k = 0; k <= degree; ++k) c[k] = sol(k);
    level = sol(n - 1);

    auto err = [&](double s) { return fs(s) - Clenshaw(c, s); };
    std::vector<double> e(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      e[i] = fgrid[i] - Clenshaw(c, grid[i]);
    }

    // One extremum per run of constant sign; this alternates by
    // construction.
    std::vector<Extremum> ext;
    std::size_t i = 0;
    while (i < grid.size()) {
      if (e[i] == 0.0) {
        ++i;
        continue;
      }
      const bool pos = e[i] > 0.0;
      std::size_t best = i;
      std::size_t j = i;
      while (j < grid.size() && e[j] != 0.0 && (e[j] > 0.0) == pos) {
        if (std::abs(e[j]) > std::abs(e[best])) best = j;
        ++j;
      }
      const double sign = pos ? 1.0 : -1.0;
      auto g_signed = [&](double s) { return sign * err(s); };
      const double left = grid[best > 0 ? best - 1 : 0];
      const double right = grid[best + 1 < grid.size() ? best + 1 : best];
      Extremum x{grid[best], e[best]};
      if (right > left) {
        const double s = GoldenMax(g_signed, left, right);
        const double v = err(s);
        if (sign * v > sign * x.e) x = {s, v};
      }
      ext.push_back(x);
      i = j;
    }

    sup = 0.0;
    for (const auto& x : ext) sup = std::max(sup, std::abs(x.e));
    if (sup <= 1e-15 * fscale) {
      // f is (numerically) a polynomial of this degree.
      spread = 0.0;
      break;
    }

    if (static_cast<int>(ext.size()) >= n) {
      while (static_cast<int>(ext.size()) > n) {
        const std::size_t m = ext.size();
        if (static_cast<int>(m) == n + 1) {
          if (std::abs(ext.front().e) < std::abs(ext.back().e)) {
            ext.erase(ext.begin());
          } else {
            ext.pop_back();
          }
          continue;
        }
        std::size_t k = 0;
        for (std::size_t t = 1; t < m; ++t) {
          if (std::abs(ext[t].e) < std::abs(ext[k].e)) k = t;
        }
        if (k == 0 || k == m - 1) {
          ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(k));
          continue;
        }
        const std::size_t other =
            std::abs(ext[k - 1].e) < std::abs(ext[k + 1].e) ? k - 1 : k + 1;
        const std::size_t first = std::min(k, other);
        ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(first),
                  ext.begin() + static_cast<std::ptrdiff_t>(first) + 2);
      }
      double lo_e = std::abs(ext[0].e), hi_e = lo_e;
      for (const auto& x : ext) {
        lo_e = std::min(lo_e, std::abs(x.e));
        hi_e = std::max(hi_e, std::abs(x.e));
      }
      spread = (hi_e - lo_e) / hi_e;
      for (int t = 0; t < n; ++t) ref[t] = ext[t].s;
    } else {
      // Too few sign changes (degenerate start): swap the worst point into
      // the old reference, keeping alternation.
      const Extremum worst = *std::max_element(
          ext.begin(), ext.end(), [](const Extremum& p, const Extremum& q) {
            return std::abs(p.e) < std::abs(q.e);
          });
      const double ws = worst.e > 0.0 ? 1.0 : -1.0;
      auto ref_sign = [&](int t) {
        const double s = (t % 2 == 0) ? 1.0 : -1.0;
        return level < 0.0 ? -s : s;
      };
      if (worst.s < ref[0]) {
        if (ref_sign(0) != ws) {
          std::rotate(ref.rbegin(), ref.rbegin() + 1, ref.rend());
        }
        ref[0] = worst.s;
      } else if (worst.s > ref[n - 1]) {
        if (ref_sign(n - 1) != ws) {
          std::rotate(ref.begin(), ref.begin() + 1, ref.end());
        }
        ref[n - 1] = worst.s;
      } else {
        int t = 0;
        while (t + 1 < n && ref[t + 1] < worst.s) ++t;
        ref[ref_sign(t) == ws ? t : t + 1] = worst.s;
      }
      spread = 1.0;
    }

    if (spread < options.tolerance) break;
    if (iter + 1 >= options.max_iterations) {
      if (spread < options.accept_tolerance) break;
      std::ostringstream msg;
      msg << "Remez did not converge: degree " << degree << ", "
          << options.max_iterations << " iterations, error spread " << spread
          << ", levelled error " << level;
      throw ConvergenceError(msg.str());
    }
  }

  UniPolyApprox out;
  out.degree = degree;
  out.cheb = c;
  out.lo = lo;
  out.hi = hi;
  out.sup_error = sup;
  out.coeffs = ChebyshevToMonomial(c, lo, hi);
  return out;
}

UniPolyApprox RemezAbs(int degree) {
  CheckDegree(degree, 0);
  const double kink[] = {0.0};
  UniPolyApprox r =
      Remez([](double t) { return std::abs(t); }, degree, -1.0, 1.0, kink);
  for (int k = 1; k <= degree; k += 2) {
    r.cheb[k] = 0.0;
    r.coeffs[k] = 0.0;
  }
  return r;
}

UniPolyApprox ShiftedReluApprox(double b, int degree) {
  CheckDegree(degree, 0);
  if (!(b >= 0.0 && b <= 1.0)) {
    throw DomainError("kink location must lie in [0, 1]");
  }
  UniPolyApprox out;
  out.degree = degree;
  out.lo = 0.0;
  out.hi = 1.0;
  out.cheb.assign(degree + 1, 0.0);
  // On [0, 1], with s = 2y - 1: y = (s + 1) / 2.
  if (b == 0.0) {
    // [-y]^+ vanishes on [0, 1].
  } else if (b == 1.0) {
    // 1 - y = 1/2 - s/2.
    out.cheb[0] = 0.5;
    if (degree >= 1) {
      out.cheb[1] = -0.5;
    } else {
      out.sup_error = 0.5;
    }
  } else {
    const double kink[] = {b};
    const UniPolyApprox abs = Remez(
        [b](double y) { return std::abs(y - b); }, degree, 0.0, 1.0, kink);
    for (int k = 0; k <= degree; ++k) out.cheb[k] = 0.5 * abs.cheb[k];
    // (b - y) / 2 = (b - 1/2) / 2 - s / 4.
    out.cheb[0] += 0.5 * (b - 0.5);
    if (degree >= 1) {
      out.cheb[1] -= 0.25;
      out.sup_error = 0.5 * abs.sup_error;
    } else {
      // A constant cannot carry the linear part; measure directly.
      double sup = 0.0;
      for (int i = 0; i <= 4096; ++i) {
        const double y = i / 4096.0;
        sup = std::max(sup, std::abs(std::max(b - y, 0.0) - out.cheb[0]));
      }
      const double worst = std::max(std::abs(b - out.cheb[0]),
                                    std::abs(out.cheb[0]));
      out.sup_error = std::max(sup, worst);
    }
  }
  out.coeffs = ChebyshevToMonomial(out.cheb, 0.0, 1.0);
  return out;
}

double BivariateSupError(const BiPolyApprox& approx,
                         const std::function<double(double, double)>& f,
                         int points) {
  std::vector<double> axis;
  axis.reserve(2 * points + 2);
  for (int i = 0; i <= points; ++i) {
    const double u = static_cast<double>(i) / points;
    axis.push_back(u);
    axis.push_back(u * u);
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  const int d = approx.degree;
  const int m = static_cast<int>(axis.size());
  Eigen::MatrixXd t(m, d + 1);
  std::vector<double> row(d + 1);
  for (int i = 0; i < m; ++i) {
    ChebRow(2.0 * axis[i] - 1.0, d, row.data());
    for (int k = 0; k <= d; ++k) t(i, k) = row[k];
  }
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      c(approx.cheb.data(), d + 1, d + 1);
  const Eigen::MatrixXd vals = t * c * t.transpose();
  double sup = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      sup = std::max(sup, std::abs(vals(i, j) - f(axis[i], axis[j])));
    }
  }
  return sup;
}

namespace {

// Monomial coefficients on [0,1]^2 from a row-major Chebyshev matrix.
std::vector<double> BiChebToMonomial(const std::vector<double>& cheb, int d) {
  const auto t = ChebToMonoMatrix(d, 0.0, 1.0);
  // tmp(i, b) = sum_a t[a][i] c(a, b)
  std::vector<Big> tmp((d + 1) * (d + 1), Big(0));
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; b <= d; ++b) {
      const double cab = cheb[a * (d + 1) + b];
      if (cab == 0.0) continue;
      const Big bc(cab);
      for (int i = 0; i <= a; ++i) tmp[i * (d + 1) + b] += t[a][i] * bc;
    }
  }
  std::vector<double> out((d + 1) * (d + 1));
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d; ++j) {
      Big v = 0;
      for (int b = j; b <= d; ++b) v += tmp[i * (d + 1) + b] * t[b][j];
      out[i * (d + 1) + j] = static_cast<double>(v);
    }
  }
  return out;
}

double FilterWeight(int m, int degree) {
  const double r = static_cast<double>(m) / (degree + 1);
  return std::exp(-36.0 * std::pow(r, 8));
}

}  // namespace

BiPolyApprox ChebBivariate(BivariateTarget target, int degree) {
  CheckDegree(degree, 1);
  const auto f = target == BivariateTarget::kSqrtSum ? SqrtSum : ReluSqrtDiff;
  const int d = degree;
  const int big_n = 4 * d;
  std::vector<double> x(big_n + 1);
  for (int j = 0; j <= big_n; ++j) {
    x[j] = 0.5 * (std::cos(std::numbers::pi * j / big_n) + 1.0);
  }
  // cosines(a, j) = cos(pi a j / N) with the trapezoid halving at the ends.
  Eigen::MatrixXd w(d + 1, big_n + 1);
  for (int a = 0; a <= d; ++a) {
    for (int j = 0; j <= big_n; ++j) {
      double v = std::cos(std::numbers::pi * ((a * j) % (2 * big_n)) / big_n);
      if (j == 0 || j == big_n) v *= 0.5;
      w(a, j) = v * 2.0 / big_n;
    }
    if (a == 0) w.row(a) *= 0.5;
  }
  Eigen::MatrixXd vals(big_n + 1, big_n + 1);
  for (int i = 0; i <= big_n; ++i) {
    for (int j = 0; j <= big_n; ++j) vals(i, j) = f(x[i], x[j]);
  }
  const Eigen::MatrixXd c = w * vals * w.transpose();

  BiPolyApprox out;
  out.degree = d;
  out.cheb.resize((d + 1) * (d + 1));
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; b <= d; ++b) {
      out.cheb[a * (d + 1) + b] =
          c(a, b) * FilterWeight(a, d) * FilterWeight(b, d);
    }
  }
  out.coeffs = BiChebToMonomial(out.cheb, d);
  out.sup_error = BivariateSupError(out, f, 256);
  return out;
}

BiPolyApprox H2K(const BiPolyApprox& u, const BiPolyApprox& v) {
  if (u.degree != v.degree) throw DimensionError("h2k: degree mismatch");
  const int k = u.degree;
  const int d = 2 * k;
  const int s = d + 1;
  std::vector<double> h(s * s, 0.0);
  // T_a T_c = (T_{a+c} + T_{|a-c|}) / 2 in each variable.
  for (int a = 0; a <= k; ++a) {
    for (int b = 0; b <= k; ++b) {
      const double uab = u.cheb[a * (k + 1) + b];
      if (uab == 0.0) continue;
      for (int c = 0; c <= k; ++c) {
        for (int e = 0; e <= k; ++e) {
          const double w = 0.25 * uab * v.cheb[c * (k + 1) + e];
          const int i1 = a + c, i2 = std::abs(a - c);
          const int j1 = b + e, j2 = std::abs(b - e);
          h[i1 * s + j1] += w;
          h[i1 * s + j2] += w;
          h[i2 * s + j1] += w;
          h[i2 * s + j2] += w;
        }
      }
    }
  }
  // Value at the origin: T_m(-1) = (-1)^m.
  long double origin = 0.0L;
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d; ++j) {
      origin += ((i + j) % 2 == 0 ? 1.0L : -1.0L) * h[i * s + j];
    }
  }
  h[0] -= static_cast<double>(origin);

  BiPolyApprox out;
  out.degree = d;
  out.cheb = std::move(h);
  out.coeffs = BiChebToMonomial(out.cheb, d);
  out.coeffs[0] = 0.0;
  out.sup_error = BivariateSupError(out, ReluDiff, 256);

  const double bound = std::pow(std::numbers::sqrt2 + 1.0, 8.0 * k);
  for (double c : out.coeffs) {
    if (!(std::abs(c) <= bound)) {
      std::cerr << "dpaudit: warning: h_{2K} coefficient " << c
                << " exceeds the (sqrt2+1)^(8K) scale at K=" << k
                << "; expect numerical blow-up\n";
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CoeffCache

CoeffCache::CoeffCache(std::filesystem::path path) : path_(std::move(path)) {}

namespace {

std::unique_ptr<CoeffCache>& DefaultSlot() {
  static std::unique_ptr<CoeffCache> slot = [] {
    const char* env = std::getenv("DPAUDIT_CACHE");
    return std::make_unique<CoeffCache>(
        env != nullptr ? std::filesystem::path(env) : std::filesystem::path());
  }();
  return slot;
}

}  // namespace

CoeffCache& CoeffCache::Default() { return *DefaultSlot(); }

void CoeffCache::SetDefaultPath(std::filesystem::path path) {
  DefaultSlot() = std::make_unique<CoeffCache>(std::move(path));
}

void CoeffCache::LoadLocked() {
  if (loaded_) return;
  loaded_ = true;
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw IoError("cannot read coefficient cache " + path_.string());
  std::string line;
  if (!std::getline(in, line) || line != kVersion) {
    // Stale or foreign format; everything gets rebuilt and rewritten.
    return;
  }

  struct UniParts {
    std::map<int, double> mono, cheb;
    double sup = -1.0;
  };
  struct BiParts {
    std::map<std::pair<int, int>, double> mono, cheb;
    double sup = -1.0;
  };
  std::map<std::pair<std::string, int>, UniParts> uni;
  std::map<std::pair<std::string, int>, BiParts> bi;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 4 && f.size() != 5) {
      throw IoError("polycache: malformed row '" + line + "'");
    }
    std::string id(f[0]);
    const int degree = ParseInt(f[1]);
    const int i = ParseInt(f[2]);
    const double value = ParseDouble(f.back());
    std::string base = id, part = "mono";
    for (std::string_view suffix : {"_cheb", "_sup_error"}) {
      if (id.size() > suffix.size() &&
          id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0) {
        base = id.substr(0, id.size() - suffix.size());
        part = std::string(suffix.substr(1));
      }
    }
    const bool is_bi = base == "u" || base == "v" || base == "h";
    if (!is_bi && base != "abs") {
      throw IoError("polycache: unknown function id '" + id + "'");
    }
    if (is_bi) {
      auto& e = bi[{base, degree}];
      if (part == "sup_error") {
        e.sup = value;
      } else {
        if (f.size() != 5) throw IoError("polycache: bad row '" + line + "'");
        const int j = ParseInt(f[3]);
        (part == "cheb" ? e.cheb : e.mono)[{i, j}] = value;
      }
    } else {
      auto& e = uni[{base, degree}];
      if (part == "sup_error") {
        e.sup = value;
      } else {
        (part == "cheb" ? e.cheb : e.mono)[i] = value;
      }
    }
  }

  for (const auto& [key, parts] : uni) {
    const int d = key.second;
    if (parts.sup < 0.0 || static_cast<int>(parts.mono.size()) != d + 1 ||
        static_cast<int>(parts.cheb.size()) != d + 1) {
      continue;
    }
    auto a = std::make_shared<UniPolyApprox>();
    a->degree = d;
    a->sup_error = parts.sup;
    for (const auto& [i, v] : parts.mono) a->coeffs.push_back(v);
    for (const auto& [i, v] : parts.cheb) a->cheb.push_back(v);
    uni_[{key.first, d, 0.0}] = std::move(a);
  }
  for (const auto& [key, parts] : bi) {
    // h is keyed by K but has degree 2K per variable.
    const int d = key.first == "h" ? 2 * key.second : key.second;
    const std::size_t want = static_cast<std::size_t>((d + 1) * (d + 1));
    if (parts.sup < 0.0 || parts.mono.size() != want ||
        parts.cheb.size() != want) {
      continue;
    }
    auto a = std::make_shared<BiPolyApprox>();
    a->degree = d;
    a->sup_error = parts.sup;
    for (const auto& [ij, v] : parts.mono) a->coeffs.push_back(v);
    for (const auto& [ij, v] : parts.cheb) a->cheb.push_back(v);
    bi_[{key.first, key.second, 0.0}] = std::move(a);
  }
}

void CoeffCache::SaveLocked() const {
  if (path_.empty()) return;
  std::ostringstream out;
  out << kVersion << '\n';
  for (const auto& [key, a] : uni_) {
    if (key.id != "abs") continue;
    for (int i = 0; i <= a->degree; ++i) {
      out << key.id << ',' << key.degree << ',' << i << ','
          << FormatDouble(a->coeffs[i]) << '\n';
    }
    for (int i = 0; i <= a->degree; ++i) {
      out << key.id << "_cheb," << key.degree << ',' << i << ','
          << FormatDouble(a->cheb[i]) << '\n';
    }
    out << key.id << "_sup_error," << key.degree << ",0,"
        << FormatDouble(a->sup_error) << '\n';
  }
  for (const auto& [key, a] : bi_) {
    const int d = a->degree;
    for (const char* part : {"", "_cheb"}) {
      const auto& v = part[0] == '\0' ? a->coeffs : a->cheb;
      for (int i = 0; i <= d; ++i) {
        for (int j = 0; j <= d; ++j) {
          out << key.id << part << ',' << key.degree << ',' << i << ',' << j
              << ',' << FormatDouble(v[i * (d + 1) + j]) << '\n';
        }
      }
    }
    out << key.id << "_sup_error," << key.degree << ",0,"
        << FormatDouble(a->sup_error) << '\n';
  }
  const std::string text = out.str();

  std::filesystem::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write coefficient cache " + tmp.string());
    f << text;
    if (!f.flush()) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) {
    throw IoError("cannot replace " + path_.string() + ": " + ec.message());
  }
}

std::shared_ptr<const UniPolyApprox> CoeffCache::Abs(int degree) {
  CheckDegree(degree, 0);
  std::lock_guard<std::mutex> lock(mu_);
  LoadLocked();
  const Key key{"abs", degree, 0.0};
  if (auto it = uni_.find(key); it != uni_.end()) return it->second;
  auto built = std::make_shared<const UniPolyApprox>(RemezAbs(degree));
  uni_.emplace(key, built);
  SaveLocked();
  return built;
}

std::shared_ptr<const BiPolyApprox> CoeffCache::Bivariate(
    BivariateTarget target, int degree) {
  CheckDegree(degree, 1);
  std::lock_guard<std::mutex> lock(mu_);
  LoadLocked();
  const char* id = target == BivariateTarget::kSqrtSum ? "u" : "v";
  const Key key{id, degree, 0.0};
  if (auto it = bi_.find(key); it != bi_.end()) return it->second;
  auto built =
      std::make_shared<const BiPolyApprox>(ChebBivariate(target, degree));
  bi_.emplace(key, built);
  SaveLocked();
  return built;
}

std::shared_ptr<const BiPolyApprox> CoeffCache::H(int degree) {
  CheckDegree(degree, 1);
  auto u = Bivariate(BivariateTarget::kSqrtSum, degree);
  auto v = Bivariate(BivariateTarget::kReluSqrtDiff, degree);
  std::lock_guard<std::mutex> lock(mu_);
  const Key key{"h", degree, 0.0};
  if (auto it = bi_.find(key); it != bi_.end()) return it->second;
  auto built = std::make_shared<const BiPolyApprox>(H2K(*u, *v));
  bi_.emplace(key, built);
  SaveLocked();
  return built;
}

std::shared_ptr<const UniPolyApprox> CoeffCache::ShiftedRelu(double b,
                                                             int degree) {
  CheckDegree(degree, 0);
  std::lock_guard<std::mutex> lock(mu_);
  const Key key{"relu", degree, b};
  if (auto it = uni_.find(key); it != uni_.end()) return it->second;
  auto built = std::make_shared<const UniPolyApprox>(ShiftedReluApprox(b, degree));
  uni_.emplace(key, built);
  return built;
}

bool CoeffCache::Populate(int degree) {
  CheckDegree(degree, 1);
  std::size_t before = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    LoadLocked();
    before = uni_.count({"abs", degree, 0.0}) + bi_.count({"u", degree, 0.0}) +
             bi_.count({"v", degree, 0.0}) + bi_.count({"h", degree, 0.0});
  }
  Abs(degree);
  H(degree);
  return before != 4;
}

}  // namespace dpaudit
