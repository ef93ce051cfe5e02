// SPDX-License-Identifier: Apache-2.0
#ifndef KRAICHNAN_QUADRATURE_HPP
#define KRAICHNAN_QUADRATURE_HPP

#include <functional>

namespace kraichnan {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error
  long n_evals = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 7/15 with interval bisection. Throws NumericalError
// (reporting the achieved tolerance) if the target is not reached.
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol = 0.0, int max_depth = 30);

// Convenience wrapper returning the value only.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol = 0.0);

// tanh-sinh (double exponential) rule on (a,b); robust to integrable endpoint
// singularities. Refines the step until two levels agree to rel_tol.
double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol);

// Non-adaptive 20-point Gauss-Legendre on [a,b].
double gauss_legendre_20(const std::function<double(double)>& f, double a, double b);

}  // namespace kraichnan

#endif
