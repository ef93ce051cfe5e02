// SPDX-License-Identifier: Apache-2.0
//
// Isotropic Kraichnan covariance: structure functions b_L, b_N, the matrix
// Q(z) = C(0) - C(z), regime classification, and the derived constants
// (c, beta, alpha_1, delta_star, c_xi, c_tilde, K_Ric).
#ifndef KRAICHNAN_KERNELS_HPP
#define KRAICHNAN_KERNELS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace kraichnan {

enum class KernelMode { full_kraichnan, self_similar };

enum class Regime { coalescing, diffusive_with_hitting, diffusive_no_hitting, boundary_case };

std::string to_string(Regime r);
std::string to_string(KernelMode m);

struct ModelParams {
  int d = 2;                 // spatial dimension, >= 2
  double alpha = 0.5;        // Hoelder regularity, in (0,1)
  double eta = 1.0;          // compressibility ratio, in [0,1]; 1 = divergence-free
  double m = 1.0;            // infra-red cutoff, > 0
  double trace_c0 = 0.0;     // target Tr C(0); 0 means default 2d
  KernelMode kernel_mode = KernelMode::full_kraichnan;
  double self_similar_c = 1.0;  // amplitude c when kernel_mode == self_similar

  void validate() const;  // throws ValidationError
  double resolved_trace_c0() const { return trace_c0 > 0.0 ? trace_c0 : 2.0 * d; }
};

// Threshold classification of (alpha, eta, d). Ties are detected with exact
// floating-point predicates (error-free transformations), never a tolerance;
// exact equality maps to boundary_case.
Regime classify_regime(double alpha, double eta, int d);

struct DerivedConstants {
  double c = 0.0;           // leading coefficient of b_L ~ c r^{2 alpha}
  double beta = 0.0;        // small-r ratio b_N / b_L
  double alpha1 = 0.0;      // normalization integral behind c
  double delta_star = 0.0;  // min{1-alpha, (d-1) beta + 1 - 2 alpha}
  double c_tilde = 0.0;     // d (1-alpha) c  (dissipation constant, eta = 1)
  double k_ric = 0.0;       // Richardson prefactor lower bound
  double bN0 = 0.0;         // B_N(0), so C(0) = B_N(0) I_d
  Regime regime = Regime::boundary_case;

  double alpha = 0.0, eta = 0.0;  // echoed inputs
  int d = 0;

  // c_xi(delta) = 1 / ((d-1) beta + 1 - 2 alpha - delta), delta in (0, delta_star)
  double c_xi(double delta) const;
};

// All closed-form constants; alpha1 by nested adaptive quadrature of its
// defining double integral.
DerivedConstants derived_constants(const ModelParams& params);

// Closed Gamma-function form of the dissipation constant (divergence-free
// noise), continuous across alpha = 1/2 via the reflection form.
double dissipation_constant_closed_form(double alpha, int d, double trace_c0);
// The alpha -> 0+ and alpha -> 1- limits of the closed form.
double dissipation_constant_limit_alpha0(int d, double trace_c0);
double dissipation_constant_limit_alpha1(int d, double trace_c0);

struct KernelOptions {
  int table_nodes = 512;        // log-spaced tabulation radii
  double r_min_factor = 1e-6;   // table spans [r_min_factor/m, r_max_factor/m]
  double r_max_factor = 1e3;
  double rel_tol = 1e-8;        // quadrature tolerance for node values
  bool tabulate = true;         // full_kraichnan: build the table eagerly
};

// Immutable after construction; safe to share across threads.
class IsotropicKernel {
 public:
  explicit IsotropicKernel(const ModelParams& params, const KernelOptions& opts = {});

  const ModelParams& params() const { return params_; }
  const DerivedConstants& constants() const { return constants_; }
  double c0() const { return c0_; }  // C(0) = 2 c0 I_d

  // Structure functions. self_similar: exact power laws. full_kraichnan:
  // monotone cubic interpolation of the tabulated values (log-log), falling
  // back to direct quadrature when no table was built. Out-of-range queries
  // clamp to the table edge (power-law extension below, saturation above).
  double bL(double r) const;
  double bN(double r) const;
  double bL_prime(double r) const;
  double bN_prime(double r) const;

  // Direct adaptive-quadrature evaluation (no table). Exposed so callers can
  // bypass interpolation; this is what the tabulation itself uses.
  double bL_exact(double r, double rel_tol = 1e-10) const;
  double bN_exact(double r, double rel_tol = 1e-10) const;

  // Q(z) as a dense d x d row-major matrix; Q(0) = 0.
  std::vector<double> q_matrix(const std::vector<double>& z) const;

  // Minimum over n_samples log-spaced radii in [r0, R] of min(b_L, b_N).
  double ellipticity_floor(double r0, double R, int n_samples) const;

  struct TableRow {
    double r, bL, bN, dlogbL, dlogbN;  // slopes are d log b / d log r
  };
  const std::vector<TableRow>& table() const { return table_; }

 private:
  ModelParams params_;
  DerivedConstants constants_;
  KernelOptions opts_;
  double c0_ = 0.0;
  double a_spec_ = 0.0, b_spec_ = 0.0;  // gradient / solenoidal weights
  std::vector<TableRow> table_;

  // cached inner integral Phi_j(s) on a log grid, built once per kernel
  struct PhiTable {
    double log_lo = 0.0, step = 0.0;
    std::vector<double> logv, slope;  // log Phi_j, d log Phi_j / d log s
  };
  PhiTable phi_[2];
  bool phi_ready_ = false;

  void build_phi_table();
  double phi_lookup(int j, double s) const;

  struct Pair { double bL, bN; };
  Pair eval_pair(double r, double rel_tol, bool with_prime, Pair* prime,
                 bool use_cache = true) const;
  double interp(double r, bool normal, bool prime) const;
};

}  // namespace kraichnan

#endif
