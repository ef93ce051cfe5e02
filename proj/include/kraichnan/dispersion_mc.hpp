// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo for the pair-separation diffusion
//   dr = (d-1) (b_N(r)/r) dt + sqrt(2 b_L(r)) dB,
// the radial generator of the two-point correlation PDE at kappa = 0.
#ifndef KRAICHNAN_DISPERSION_MC_HPP
#define KRAICHNAN_DISPERSION_MC_HPP

#include <cstdint>
#include <vector>

#include "kraichnan/kernels.hpp"

namespace kraichnan {

struct McConfig {
  long n_paths = 10000;
  double r0 = 0.01;           // initial separation; 0 means Dirac start at floor_eps
  double t_end = 1.0;
  double dt_max = 1e-2;
  double eps_dt = 0.1;        // dt = min(dt_max, eps_dt * r^{2-2alpha})
  double floor_eps = 1e-8;    // reflection floor
  std::uint64_t master_seed = 0x6b7261696331ULL;
  std::vector<double> sample_times;  // defaults to a geometric schedule
  bool keep_samples = false;         // retain full per-path samples (small runs)

  void validate() const;
};

struct SeparationEnsemble {
  McConfig config;
  ModelParams model;
  std::vector<double> times;
  std::vector<double> orders;               // streamed moment orders
  // sums[t][q][block]: per-block partial sums of r^q and r^{2q}, fixed order
  std::vector<std::vector<double>> sum_pow;    // [orders.size()*times.size()] blocks reduced
  std::vector<std::vector<double>> sum_pow2;   // same layout, of r^{2q}
  long n_effective = 0;                        // paths that finished clean
  long n_flagged = 0;                          // excluded paths
  std::vector<std::vector<double>> samples;    // [time][path] if keep_samples
  std::vector<double> sup_stat;                // per path sup_t t^{-1/(1-a)} r_t^2

  double mean(size_t t_idx, size_t q_idx) const;
  double stderr_of(size_t t_idx, size_t q_idx) const;
  size_t order_index(double q) const;  // throws if q not streamed
};

// Euler-Maruyama with the adaptive step rule and reflection at floor_eps.
// Streams moments of orders {2-2alpha, 1, 2, 4}. Deterministic for fixed
// (config, kernel) regardless of n_threads.
SeparationEnsemble simulate_separation(const IsotropicKernel& kernel, const McConfig& config,
                                       int n_threads = 1);

struct MomentPoint {
  double t, mean, stderr_val;
  long n;
};

std::vector<MomentPoint> moment_curve(const SeparationEnsemble& ens, double q);

struct RichardsonReport {
  double exponent = 0.0;        // log-log slope of E[Var] = E[r^2]/2 vs t
  double exponent_ci = 0.0;     // 95% half-width
  double prefactor = 0.0;       // exp(intercept)
  double k_ric = 0.0;
  double lower_bound_pass = 0.0;  // fraction of fit-window times with E[Var] >= 0.9 K_Ric t^{1/(1-a)}
  long flagged_paths = 0;
  double sup_p50 = 0.0, sup_p90 = 0.0, sup_max = 0.0;  // pathwise sup statistic
  double fit_t_lo = 0.0, fit_t_hi = 0.0;
};

RichardsonReport richardson_report(const SeparationEnsemble& ens, const DerivedConstants& constants);

// Var(mu) * ||mu||_{L2}^{4/d} for the isotropic Gaussian with scale sigma:
// the variance from the closed second moment, the L2 norm by radial
// quadrature of the squared density. Equals d/(4 pi) for every sigma.
double gaussian_variance_identity(double sigma, int d);

}  // namespace kraichnan

#endif
