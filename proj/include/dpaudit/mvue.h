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

// Unbiased estimators of polynomial functionals of Poisson means. Throughout,
// x_hat = count / n with count ~ Poi(n x).
//
//   FactorialProduct(j)   prod_{k<j} (x_hat - k/n)               -> x^j
//   GPoly(j, q)           sum_k C(j,k) (-q)^{j-k} F_k(x_hat)     -> (x - q)^j
//   AHat(j)               cross moments                          -> (e^eps q - p)^j
//
// and the per-symbol pieces of the two divergence estimators built on them.

#ifndef DPAUDIT_MVUE_H_
#define DPAUDIT_MVUE_H_

#include <vector>

#include "dpaudit/poly.h"

namespace dpaudit {

double FactorialProduct(int j, double x_hat, double n);

// g_{j,q}(x_hat). Evaluated with the Charlier recurrence
//   c_{j+1} = (x_hat - q - j/n) c_j - (j/n) q c_{j-1},
// which is the same polynomial as the binomial sum without its cancellation.
double GPoly(int j, double q, double x_hat, double n);
// g_{0..max_j,q}(x_hat).
std::vector<long double> GPolyAll(int max_j, double q, double x_hat,
                                  double n);
// The defining binomial sum, kept as a cross-check.
double GPolyBinomial(int j, double q, double x_hat, double n);

// Direct double sum
//   sum_k C(j,k) F_k(q_hat) e^{eps k} (-1)^{j-k} F_{j-k}(p_hat).
double AHat(int j, double p_hat, double q_hat, double n, double epsilon);
// Same estimator written around a centre r:
//   sum_k C(j,k) e^{eps k} g_{k, r e^-eps}(q_hat) (-1)^{j-k} g_{j-k, r}(p_hat).
// r must not depend on (p_hat, q_hat) for unbiasedness.
double AHatCentered(int j, double p_hat, double q_hat, double n,
                    double epsilon, double center);
std::vector<long double> AHatCenteredAll(int max_j, double p_hat,
                                         double q_hat, double n,
                                         double epsilon, double center);

// Known-P estimator pieces. Delta = c1 ln n / n.
//
// Small p (p <= e^eps Delta): approximate [p - e^eps q]^+ for q in
// [0, 2 Delta] and replace q^j by F_j(q_hat).
double DTildeKnownCase1(double q_hat, double p, double n, int degree,
                        double c1, double epsilon,
                        CoeffCache* cache = nullptr);
// Large p: the |t| approximation rescaled to the window
// e^-eps p +- sqrt(e^-eps p Delta).
double DTildeKnownCase2(double q_hat, double p, double n, int degree,
                        double c1, double epsilon,
                        CoeffCache* cache = nullptr);

// Both-unknown pieces. Small mass: 2 Delta h_{2K}(p / 2Delta,
// e^eps q / 2Delta) estimated term by term.
double DTilde1(double p_hat2, double q_hat2, double n, int degree, double c1,
               double epsilon, CoeffCache* cache = nullptr);
// Large mass: (1/2) sum_j a_j W^{1-j} A_j with a_1 = r_1 - 1 and
// W = sqrt(8 c1 ln n / n) sqrt(p_hat1 + e^eps q_hat1). The cross moments
// are centred at (p_hat1 + e^eps q_hat1) / 2.
double DTilde2(double p_hat2, double q_hat2, double p_hat1, double q_hat1,
               double n, int degree, double c1, double epsilon,
               CoeffCache* cache = nullptr);

// The width W used by DTilde2.
double DTilde2Width(double p_hat1, double q_hat1, double n, double c1,
                    double epsilon);

}  // namespace dpaudit

#endif  // DPAUDIT_MVUE_H_
