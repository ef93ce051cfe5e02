// SPDX-License-Identifier: Apache-2.0
//
// Log-log regression, the Yaglom dissipation balance, and early-time blow-up
// fits on solver / Monte Carlo output.
#ifndef KRAICHNAN_SCALING_ANALYSIS_HPP
#define KRAICHNAN_SCALING_ANALYSIS_HPP

#include <utility>
#include <vector>

#include "kraichnan/kernels.hpp"
#include "kraichnan/radial_pde.hpp"

namespace kraichnan {

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;     // of log y vs log t
  double slope_ci_95 = 0.0;   // half-width
  double r_squared = 0.0;
  int n_points = 0;
  double window_lo = 0.0, window_hi = 0.0;
};

// OLS of log y on log t over points with t in [window_lo, window_hi].
PowerFit loglog_fit(const std::vector<std::pair<double, double>>& points, double window_lo,
                    double window_hi);

struct YaglomReport {
  std::vector<double> times;       // interior sample times
  std::vector<double> amplitude;   // A_t
  std::vector<double> energy_rate; // -d/dt f(t,0), centered differences
  std::vector<double> residual;    // |d/dt f(0) + 2 c~ A_t| / |d/dt f(0)|
  double integrated_lhs = 0.0;     // 2 c~ int A_t dt
  double integrated_rhs = 0.0;     // f(0,0) - f(T,0)
  double integrated_residual = 0.0;
  double c_tilde = 0.0;
};

// Differential and integrated forms of the dissipation balance
//   -d/dt f(t,0) = 2 c~ A_t,   2 c~ int_0^T A_t dt = f(0,0) - f(T,0).
YaglomReport yaglom_balance(const PdeRun& run, const DerivedConstants& constants);

// Fit of the increment seminorm [[f_t]]_{I^{2-2a-2delta}(l)} against t on the
// early-time samples; the blow-up exponent is -slope.
PowerFit blowup_exponent(const PdeRun& run, double delta);

}  // namespace kraichnan

#endif
