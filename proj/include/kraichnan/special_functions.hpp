// SPDX-License-Identifier: Apache-2.0
#ifndef KRAICHNAN_SPECIAL_FUNCTIONS_HPP
#define KRAICHNAN_SPECIAL_FUNCTIONS_HPP

namespace kraichnan {

// log Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
double log_gamma(double x);

// Gamma(x) for any non-pole x, via reflection for x < 0.5.
double gamma_fn(double x);

// Euler Beta B(p, q), p, q > 0.
double beta_fn(double p, double q);

// cos(pi*a) * Gamma(1-2a) evaluated through the reflection formula
//   cos(pi a) Gamma(1-2a) = pi / (2 sin(pi a) Gamma(2a)),
// which is finite across a = 1/2 where Gamma(1-2a) alone has a pole.
double cospi_gamma_one_minus_2a(double a);

// Surface area of the unit sphere S^{d-1} in R^d.
double sphere_area(int d);

}  // namespace kraichnan

#endif
