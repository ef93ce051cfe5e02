// SPDX-License-Identifier: Apache-2.0
//
// Radial two-point correlation PDE on a graded grid:
//   transport:          df/dt = (1-k) [ b_L f'' + (d-1) b_N f'/r ] + 2 c0 k [ f'' + (d-1) f'/r ]
//   continuity_divfree: dG/dt = r^{1-d} d_r( r^{d-1} [ (1-k) b_L + 2 c0 k ] d_r G )
// (the divergence form equals the transport operator when div Q = 0).
#ifndef KRAICHNAN_RADIAL_PDE_HPP
#define KRAICHNAN_RADIAL_PDE_HPP

#include <functional>
#include <vector>

#include "kraichnan/kernels.hpp"

namespace kraichnan {

struct RadialGrid {
  std::vector<double> nodes;  // r_0 = 0 < r_1 = h_min < ... < r_N = R_max
  double h_min = 0.0;
  double R_max = 0.0;
  double growth = 0.0;

  size_t size() const { return nodes.size(); }
};

// Geometric grid: spacing starts at h_min, multiplied by `growth` per cell
// until the uniform cap R_max/128, then uniform to R_max.
RadialGrid build_grid(double h_min, double R_max, double growth);

enum class PdeMode { transport, continuity_divfree };
enum class OuterBc { dirichlet_zero, homogeneous_neumann };

struct PdeConfig {
  double kappa = 0.0;                   // viscosity parameter in [0, 1/2)
  PdeMode mode = PdeMode::transport;
  double dt = 1e-3;                     // time-step cap
  double dt_geometric = 0.0;            // if > 0: dt(t) = min(dt, max(dt*1e-6, dt_geometric*t))
  double theta = 1.0;                   // implicitness weight in [1/2, 1]
  OuterBc outer_bc = OuterBc::dirichlet_zero;
  std::vector<double> observable_times;

  // observable knobs
  double seminorm_delta = 0.05;  // seminorms at exponents 2-2a -/+ delta
  double seminorm_l = 0.5;
  double corr_length = 1.0;      // sets the default amplitude-fit window
  double fit_r_lo = 0.0;         // 0 = default 5*h_min
  double fit_r_hi = 0.0;         // 0 = default 0.05*corr_length
};

struct RadialProfile {
  double t = 0.0;
  std::vector<double> values;
};

struct PdeRun {
  RadialGrid grid;
  PdeConfig config;
  ModelParams model;
  std::vector<RadialProfile> profiles;    // at observable times
  std::vector<double> times;
  std::vector<double> energy;             // f(t, 0)
  std::vector<double> seminorm_minus;     // [[f]]_{I^{2-2a-delta}(l)}
  std::vector<double> seminorm_plus;      // [[f]]_{I^{2-2a+delta}(l)}
  std::vector<double> amplitude;          // A_t from the fit window (0 if fit failed)
  std::vector<double> amplitude_exponent; // fitted exponent (diagnostic)
  std::vector<double> mass;               // continuity mode; else 0
  std::vector<double> boundary_flux;      // outer-boundary flux magnitude
};

// Advance the theta-scheme to t_end, recording observables at the configured
// sample times. f0 is evaluated on the grid nodes.
PdeRun evolve(const IsotropicKernel& kernel, const RadialGrid& grid, const PdeConfig& config,
              const std::function<double(double)>& f0, double t_end);

// f(t,0) series of a completed run.
std::vector<std::pair<double, double>> energy_series(const PdeRun& run);

// sup over grid nodes 0 < r_i < l of |f(r_i) - f(0)| / r_i^gamma.
double increment_seminorm(const std::vector<double>& nodes, const std::vector<double>& values,
                          double gamma, double l);

struct AmplitudeFit {
  double amplitude = 0.0;        // A with f(t,0) - f(t,r) ~ A r^gamma on the window
  double fitted_exponent = 0.0;  // free-slope diagnostic
  int n_points = 0;
};

// Least-squares fit of log(f(t,0) - f(t,r)) against log r on [r_lo, r_hi].
// gamma is the exponent at which the amplitude is read off.
AmplitudeFit singular_amplitude(const RadialGrid& grid, const std::vector<double>& values,
                                double gamma, double r_lo, double r_hi);

struct XiRow {
  double r, xi, dxi, ratio;  // ratio = dxi / r^{1-2a-delta} -> c_xi
};

// Change-of-variables diagnostic: dxi/dr by its defining double integral,
// xi by cumulative integration from xi(0) = 0.
std::vector<XiRow> xi_diagnostic(const IsotropicKernel& kernel, double delta,
                                 const std::vector<double>& r_grid);

}  // namespace kraichnan

#endif
