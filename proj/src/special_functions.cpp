// SPDX-License-Identifier: Apache-2.0
#include "kraichnan/special_functions.hpp"

#include <cmath>

#include "kraichnan/errors.hpp"

namespace kraichnan {

namespace {
// Lanczos coefficients, g = 7, n = 9 (Godfrey's set). Relative accuracy
// better than 1e-13 on the positive axis after reflection.
const double kLanczos[9] = {
    0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
    771.32342877765313,   -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
}  // namespace

double log_gamma(double x) {
  if (!(x > 0)) throw ValidationError("log_gamma: argument must be positive");
  if (x < 0.5) {
    // log Gamma(x) = log(pi / sin(pi x)) - log Gamma(1 - x)
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  double z = x - 1.0;
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
  double t = z + 7.5;
  return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(a);
}

double gamma_fn(double x) {
  if (x > 0.5) return std::exp(log_gamma(x));
  double s = std::sin(M_PI * x);
  if (s == 0.0) throw ValidationError("gamma_fn: pole at non-positive integer");
  // Gamma(x) Gamma(1-x) = pi / sin(pi x)
  return M_PI / (s * std::exp(log_gamma(1.0 - x)));
}

double beta_fn(double p, double q) {
  return std::exp(log_gamma(p) + log_gamma(q) - log_gamma(p + q));
}

double cospi_gamma_one_minus_2a(double a) {
  if (!(a > 0.0 && a < 1.0))
    throw ValidationError("cospi_gamma_one_minus_2a: a must lie in (0,1)");
  return M_PI / (2.0 * std::sin(M_PI * a) * gamma_fn(2.0 * a));
}

double sphere_area(int d) {
  if (d < 1) throw ValidationError("sphere_area: d must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * d) / gamma_fn(0.5 * d);
}

}  // namespace kraichnan
