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

#include "dpaudit/mvue.h"

#include <cmath>
#include <string>

#include "dpaudit/error.h"

namespace dpaudit {
namespace {

void CheckOrder(int j) {
  if (j < 0) throw DomainError("moment order must be non-negative");
  if (j > 2 * kMaxDegree) throw DomainError("moment order too large");
}

void CheckRate(double n) {
  if (!(n > 0.0)) throw DomainError("sample budget n must be positive");
}

CoeffCache& Cache(CoeffCache* cache) {
  return cache != nullptr ? *cache : CoeffCache::Default();
}

// F_0..F_m at x_hat.
std::vector<long double> FactorialAll(int m, double x_hat, double n) {
  std::vector<long double> f(m + 1);
  f[0] = 1.0L;
  for (int k = 0; k < m; ++k) {
    f[k + 1] = f[k] * (static_cast<long double>(x_hat) -
                       static_cast<long double>(k) / n);
  }
  return f;
}

std::vector<long double> BinomialRow(int j) {
  std::vector<long double> c(j + 1);
  c[0] = 1.0L;
  for (int k = 1; k <= j; ++k) c[k] = c[k - 1] * (j - k + 1) / k;
  return c;
}

double Delta(double n, double c1) { return c1 * std::log(n) / n; }

}  // namespace

double FactorialProduct(int j, double x_hat, double n) {
  CheckOrder(j);
  CheckRate(n);
  return static_cast<double>(FactorialAll(j, x_hat, n)[j]);
}

std::vector<long double> GPolyAll(int max_j, double q, double x_hat,
                                  double n) {
  CheckOrder(max_j);
  CheckRate(n);
  std::vector<long double> g(max_j + 1);
  g[0] = 1.0L;
  const long double d = static_cast<long double>(x_hat) - q;
  if (max_j >= 1) g[1] = d;
  for (int j = 1; j < max_j; ++j) {
    const long double jn = static_cast<long double>(j) / n;
    g[j + 1] = (d - jn) * g[j] - jn * q * g[j - 1];
  }
  return g;
}

double GPoly(int j, double q, double x_hat, double n) {
  return static_cast<double>(GPolyAll(j, q, x_hat, n)[j]);
}

double GPolyBinomial(int j, double q, double x_hat, double n) {
  CheckOrder(j);
  CheckRate(n);
  const auto f = FactorialAll(j, x_hat, n);
  const auto c = BinomialRow(j);
  long double s = 0.0L;
  for (int k = 0; k <= j; ++k) {
    s += c[k] * std::pow(static_cast<long double>(-q), j - k) * f[k];
  }
  return static_cast<double>(s);
}

double AHat(int j, double p_hat, double q_hat, double n, double epsilon) {
  CheckOrder(j);
  CheckRate(n);
  const auto fp = FactorialAll(j, p_hat, n);
  const auto fq = FactorialAll(j, q_hat, n);
  const auto c = BinomialRow(j);
  const long double e = std::exp(static_cast<long double>(epsilon));
  long double s = 0.0L, ek = 1.0L;
  for (int k = 0; k <= j; ++k) {
    const long double sign = (j - k) % 2 == 0 ? 1.0L : -1.0L;
    s += c[k] * fq[k] * ek * sign * fp[j - k];
    ek *= e;
  }
  return static_cast<double>(s);
}

std::vector<long double> AHatCenteredAll(int max_j, double p_hat,
                                         double q_hat, double n,
                                         double epsilon, double center) {
  CheckOrder(max_j);
  const double e = std::exp(epsilon);
  const auto gq = GPolyAll(max_j, center / e, q_hat, n);
  const auto gp = GPolyAll(max_j, center, p_hat, n);
  // u_k = e^{eps k} g_k(q_hat), w_m = (-1)^m g_m(p_hat).
  std::vector<long double> u(max_j + 1), w(max_j + 1);
  long double ek = 1.0L;
  for (int k = 0; k <= max_j; ++k) {
    u[k] = ek * gq[k];
    w[k] = (k % 2 == 0 ? 1.0L : -1.0L) * gp[k];
    ek *= e;
  }
  std::vector<long double> a(max_j + 1);
  for (int j = 0; j <= max_j; ++j) {
    const auto c = BinomialRow(j);
    long double s = 0.0L;
    for (int k = 0; k <= j; ++k) s += c[k] * u[k] * w[j - k];
    a[j] = s;
  }
  return a;
}

double AHatCentered(int j, double p_hat, double q_hat, double n,
                    double epsilon, double center) {
  return static_cast<double>(
      AHatCenteredAll(j, p_hat, q_hat, n, epsilon, center)[j]);
}

double DTildeKnownCase1(double q_hat, double p, double n, int degree,
                        double c1, double epsilon, CoeffCache* cache) {
  CheckRate(n);
  const double delta = Delta(n, c1);
  const double scale = 2.0 * std::exp(epsilon) * delta;
  if (!(p >= 0.0) || p > std::exp(epsilon) * delta) {
    throw ContractError("known-P case 1 needs p <= e^eps * c1 ln n / n");
  }
  // [p - e^eps 2 Delta y]^+ = scale * [b - y]^+.
  const double b = p / scale;
  const auto h = Cache(cache).ShiftedRelu(b, degree);
  const auto f = FactorialAll(degree, q_hat, n);
  long double s = 0.0L, inv = 1.0L;
  for (int j = 0; j <= degree; ++j) {
    s += static_cast<long double>(h->coeffs[j]) * inv * f[j];
    inv /= 2.0L * delta;
  }
  return static_cast<double>(scale * s);
}

double DTildeKnownCase2(double q_hat, double p, double n, int degree,
                        double c1, double epsilon, CoeffCache* cache) {
  CheckRate(n);
  const double delta = Delta(n, c1);
  const double e = std::exp(epsilon);
  if (!(p > e * delta)) {
    throw ContractError("known-P case 2 needs p > e^eps * c1 ln n / n");
  }
  const auto r = Cache(cache).Abs(degree);
  const double center = p / e;
  const long double w = std::sqrt(center * delta);
  const auto g = GPolyAll(degree, center, q_hat, n);
  long double s = 0.0L, wpow = w;  // W^{1-j}
  for (int j = 0; j <= degree; ++j) {
    const long double a = r->coeffs[j] - (j == 1 ? 1.0L : 0.0L);
    s += a * wpow * g[j];
    wpow /= w;
  }
  return static_cast<double>(0.5L * e * s);
}

double DTilde1(double p_hat2, double q_hat2, double n, int degree, double c1,
               double epsilon, CoeffCache* cache) {
  CheckRate(n);
  const auto h = Cache(cache).H(degree);
  const int d = h->degree;
  const long double two_delta = 2.0L * Delta(n, c1);
  const long double e = std::exp(static_cast<long double>(epsilon));
  const auto fp = FactorialAll(d, p_hat2, n);
  const auto fq = FactorialAll(d, q_hat2, n);
  // x_i = F_i(p_hat) / (2 Delta)^i, y_j = e^{j eps} F_j(q_hat) / (2 Delta)^j.
  std::vector<long double> x(d + 1), y(d + 1);
  long double inv = 1.0L, ej = 1.0L;
  for (int i = 0; i <= d; ++i) {
    x[i] = fp[i] * inv;
    y[i] = fq[i] * inv * ej;
    inv /= two_delta;
    ej *= e;
  }
  long double s = 0.0L;
  for (int i = 0; i <= d; ++i) {
    long double row = 0.0L;
    for (int j = 0; j <= d; ++j) {
      if (i + j == 0) continue;
      row += static_cast<long double>(h->coeffs[i * (d + 1) + j]) * y[j];
    }
    s += row * x[i];
  }
  return static_cast<double>(two_delta * s);
}

double DTilde2Width(double p_hat1, double q_hat1, double n, double c1,
                    double epsilon) {
  CheckRate(n);
  return std::sqrt(8.0 * c1 * std::log(n) / n) *
         std::sqrt(p_hat1 + std::exp(epsilon) * q_hat1);
}

double DTilde2(double p_hat2, double q_hat2, double p_hat1, double q_hat1,
               double n, int degree, double c1, double epsilon,
               CoeffCache* cache) {
  const double w = DTilde2Width(p_hat1, q_hat1, n, c1, epsilon);
  if (!(w > 0.0)) {
    throw DegenerateError("zero approximation width in the large-mass branch");
  }
  const auto r = Cache(cache).Abs(degree);
  const double center = 0.5 * (p_hat1 + std::exp(epsilon) * q_hat1);
  const auto a_hat =
      AHatCenteredAll(degree, p_hat2, q_hat2, n, epsilon, center);
  long double s = 0.0L, wpow = w;
  for (int j = 0; j <= degree; ++j) {
    const long double a = r->coeffs[j] - (j == 1 ? 1.0L : 0.0L);
    s += a * wpow * a_hat[j];
    wpow /= w;
  }
  return static_cast<double>(0.5L * s);
}

}  // namespace dpaudit
