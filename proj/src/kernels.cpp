// SPDX-License-Identifier: Apache-2.0
#include "kraichnan/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "kraichnan/errors.hpp"
#include "kraichnan/quadrature.hpp"
#include "kraichnan/special_functions.hpp"

namespace kraichnan {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::coalescing: return "coalescing";
    case Regime::diffusive_with_hitting: return "diffusive_with_hitting";
    case Regime::diffusive_no_hitting: return "diffusive_no_hitting";
    case Regime::boundary_case: return "boundary_case";
  }
  return "?";
}

std::string to_string(KernelMode m) {
  return m == KernelMode::full_kraichnan ? "full_kraichnan" : "self_similar";
}

void ModelParams::validate() const {
  if (d < 2) throw ValidationError("ModelParams: d must be an integer >= 2");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("ModelParams: alpha must lie in (0,1)");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("ModelParams: eta must lie in [0,1]");
  if (!(m > 0.0)) throw ValidationError("ModelParams: m must be positive");
  if (trace_c0 < 0.0) throw ValidationError("ModelParams: trace_c0 must be positive");
  if (kernel_mode == KernelMode::self_similar && !(self_similar_c > 0.0))
    throw ValidationError("ModelParams: self_similar_c must be positive");
}

// ---------------------------------------------------------------------------
// Exact sign predicates for the regime thresholds.
//
// coalescing        iff eta < 1 - d/(4 alpha^2)   iff 4 alpha^2 (1-eta) - d > 0
// no intersections  iff eta > 1/2 - (d-2)/(4 a)   iff 4 a eta - 2 a + (d-2) > 0
//
// Both quantities are short sums of products of doubles; their signs are
// computed exactly with error-free transformations (two_sum / fma products),
// so ties are detected exactly, never by a tolerance band.
namespace {

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  double bv = s - a;
  e = (a - (s - bv)) + (b - bv);
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

// Exact sign of a sum of doubles: fold terms into a nonoverlapping expansion
// (Shewchuk's grow-expansion); the largest component carries the sign.
int exact_sign(const std::vector<double>& terms) {
  std::vector<double> e;  // increasing magnitude, nonoverlapping
  for (double b : terms) {
    if (b == 0.0) continue;
    double q = b;
    std::vector<double> out;
    out.reserve(e.size() + 1);
    for (double ei : e) {
      double s, h;
      two_sum(q, ei, s, h);
      if (h != 0.0) out.push_back(h);
      q = s;
    }
    if (q != 0.0) out.push_back(q);
    e = std::move(out);
  }
  if (e.empty()) return 0;
  return e.back() > 0 ? 1 : -1;
}

// sign of 4 a^2 (1-eta) - d
int sign_coalescing_margin(double alpha, double eta, int d) {
  double a2, a2e;
  two_prod(alpha, alpha, a2, a2e);  // alpha^2 = a2 + a2e exactly
  double u, ue;
  two_sum(1.0, -eta, u, ue);  // 1-eta = u + ue exactly
  std::vector<double> parts;
  for (double x : {a2, a2e})
    for (double y : {u, ue}) {
      if (x == 0.0 || y == 0.0) continue;
      double p, pe;
      two_prod(4.0 * x, y, p, pe);  // scaling by 4 is exact
      parts.push_back(p);
      parts.push_back(pe);
    }
  parts.push_back(-static_cast<double>(d));
  return exact_sign(std::move(parts));
}

// sign of 4 a eta - 2 a + (d-2)
int sign_hitting_margin(double alpha, double eta, int d) {
  double p, pe;
  two_prod(4.0 * alpha, eta, p, pe);
  std::vector<double> parts = {p, pe, -2.0 * alpha, static_cast<double>(d - 2)};
  return exact_sign(std::move(parts));
}

}  // namespace

Regime classify_regime(double alpha, double eta, int d) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("classify_regime: alpha must lie in (0,1)");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw ValidationError("classify_regime: eta must lie in [0,1]");
  if (d < 2) throw ValidationError("classify_regime: d must be >= 2");
  int s1 = sign_coalescing_margin(alpha, eta, d);
  if (s1 > 0) return Regime::coalescing;
  if (s1 == 0) return Regime::boundary_case;
  int s2 = sign_hitting_margin(alpha, eta, d);
  if (s2 > 0) return Regime::diffusive_no_hitting;
  if (s2 == 0) return Regime::boundary_case;
  return Regime::diffusive_with_hitting;
}

// ---------------------------------------------------------------------------
// The structure-function integrals.
//
// With F(drho) = rho^{d-1} (rho^2+m^2)^{-d/2-alpha} drho and normalized Haar
// measure on the sphere, the substitution x = rho u1 r turns the radial
// integral into (u1 r)^{2a} Phi(r m u1) with
//
//   Phi_j(s) = int_0^inf (1-cos x) x^{d-1} (x^2+s^2)^{-d/2-alpha-j} dx,
//
// whose integrand is positive (no oscillatory cancellation). j=0 gives the
// values, j=1 enters d/ds Phi_0(s) = -(d+2a) s Phi_1(s).
namespace {

struct Term {
  double coef;
  int apow;
  double ppow;
};

std::vector<Term> term_deriv(const std::vector<Term>& ts) {
  std::vector<Term> out;
  out.reserve(2 * ts.size());
  for (const auto& t : ts) {
    if (t.apow != 0) out.push_back({t.coef * t.apow, t.apow - 1, t.ppow});
    out.push_back({-2.0 * t.coef * t.ppow, t.apow + 1, t.ppow + 1.0});
  }
  return out;
}

double term_eval(const std::vector<Term>& ts, double x, double s2) {
  double v = 0.0;
  for (const auto& t : ts) v += t.coef * std::pow(x, t.apow) * std::pow(x * x + s2, -t.ppow);
  return v;
}

double phi_integral(int d, double alpha, double s, int j, double rel_tol) {
  const double p = 0.5 * d + alpha + j;
  const double s2 = s * s;
  const double expo0 = 2.0 * alpha + 2.0 * j;  // decay exponent of the pure power tail
  if (s >= 40.0) {
    // Closed power part plus the odd-derivative series of the cosine part:
    //   int_0^inf cos(x) g dx = sum_k (-1)^{k+1} g^{(2k+1)}(0),
    // g = x^{d-1}(x^2+s^2)^{-p}. Odd derivatives at 0 vanish for odd d; for
    // even d, g^{(2k+1)}(0) = (2k+1)! C(-p, j) s^{-2p-2j} with j = k-(d-2)/2.
    double phipow = 0.5 * std::pow(s, -expo0) * beta_fn(0.5 * d, alpha + j);
    double phicos = 0.0;
    if (d % 2 == 0) {
      const int off = (d - 2) / 2;
      double binom = 1.0;  // C(-p, jj)
      double fac = 1.0;    // (2k+1)!
      double sign = (off % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1} at k = off
      for (int k = 0; k < off; ++k) fac *= (2.0 * k + 2.0) * (2.0 * k + 3.0);  // (2 off + 1)!
      double spow = std::pow(s, d - 2 - 2.0 * p - 2.0 * off);
      for (int jj = 0; jj < 6; ++jj) {
        int k = jj + off;
        phicos += sign * fac * binom * spow;
        sign = -sign;
        fac *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
        binom *= (-(p + jj)) / (jj + 1.0);
        spow /= s2;
      }
    }
    return phipow - phicos;
  }
  auto f = [&](double x) {
    double omc = 2.0 * std::pow(std::sin(0.5 * x), 2);  // stable 1 - cos x
    return omc * std::pow(x, d - 1) * std::pow(x * x + s2, -p);
  };
  double X = 2.0 * M_PI * std::ceil(std::max(60.0, 4.0 * s + 40.0) / (2.0 * M_PI));
  double I = integrate_tanh_sinh(f, 0.0, M_PI, rel_tol);
  for (double x = M_PI; x < X - 0.1; x += M_PI) I += gauss_legendre_20(f, x, x + M_PI);
  // power tail, series in (s/X)^2
  double q = s2 / (X * X), binom = 1.0;
  for (int k = 0; k < 64; ++k) {
    double term = binom * std::pow(q, k) * std::pow(X, -expo0) / (expo0 + 2 * k);
    I += term;
    binom *= (-(p + k)) / (k + 1.0);
    if (std::fabs(term) < 1e-18 * std::fabs(I)) break;
  }
  // cosine tail by parts; X is a multiple of 2pi so sin X = 0, cos X = 1
  std::vector<Term> g = {{1.0, d - 1, p}};
  double gv[6];
  for (int k = 0; k < 6; ++k) {
    gv[k] = term_eval(g, X, s2);
    g = term_deriv(g);
  }
  double sX = std::sin(X), cX = std::cos(X);
  I -= -sX * gv[0] - cX * gv[1] + sX * gv[2] + cX * gv[3] - sX * gv[4] - cX * gv[5];
  return I;
}

// int_0^inf (1-cos x) x^{-1-2a} dx, same splitting with monomial tails.
double one_minus_cos_integral(double alpha, double rel_tol) {
  auto f = [&](double x) {
    return 2.0 * std::pow(std::sin(0.5 * x), 2) * std::pow(x, -1.0 - 2.0 * alpha);
  };
  double X = 2.0 * M_PI * 16;
  double I = integrate_tanh_sinh(f, 0.0, M_PI, rel_tol);
  for (double x = M_PI; x < X - 0.1; x += M_PI) I += gauss_legendre_20(f, x, x + M_PI);
  I += std::pow(X, -2.0 * alpha) / (2.0 * alpha);
  // derivatives of x^{-1-2a} at X
  double gv[6], fac = 1.0, e = -1.0 - 2.0 * alpha;
  for (int k = 0; k < 6; ++k) {
    gv[k] = fac * std::pow(X, e - k);
    fac *= (e - k);
  }
  double sX = std::sin(X), cX = std::cos(X);
  I -= -sX * gv[0] - cX * gv[1] + sX * gv[2] + cX * gv[3] - sX * gv[4] - cX * gv[5];
  return I;
}

// Vector tanh-sinh: integrates a pair-valued function, converging on both.
// Endpoint distances in exponential form, as in integrate_tanh_sinh.
template <class F2>
void tanh_sinh_pair(const F2& f, double a, double b, double rel_tol, double* out0,
                    double* out1) {
  double hw = 0.5 * (b - a);
  auto node = [&](double t, double* v0, double* v1) {
    double z = M_PI_2 * std::sinh(t);
    double e2 = std::exp(-2.0 * std::fabs(z));
    double dist = hw * 2.0 * e2 / (1.0 + e2);
    double x = (t < 0) ? a + dist : b - dist;
    if (x <= a || x >= b) {
      *v0 = *v1 = 0.0;
      return;
    }
    double sech2 = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
    double w = hw * M_PI_2 * std::cosh(t) * sech2;
    f(x, v0, v1);
    *v0 *= w;
    *v1 *= w;
  };
  const double tmax = 6.0;
  double h = 0.5;
  double s0, s1, a0, a1, b0, b1;
  node(0.0, &s0, &s1);
  for (double t = h; t <= tmax; t += h) {
    node(t, &a0, &a1);
    node(-t, &b0, &b1);
    s0 += a0 + b0;
    s1 += a1 + b1;
  }
  double p0 = s0 * h, p1 = s1 * h;
  for (int lev = 0; lev < 10; ++lev) {
    h *= 0.5;
    double add0 = 0, add1 = 0;
    for (double t = h; t <= tmax; t += 2 * h) {
      node(t, &a0, &a1);
      node(-t, &b0, &b1);
      add0 += a0 + b0;
      add1 += a1 + b1;
    }
    double c0v = 0.5 * p0 + add0 * h, c1v = 0.5 * p1 + add1 * h;
    // mixed criterion: a component much smaller than its partner only needs
    // absolute accuracy on the pair's scale
    double floor_scale = 1e-6 * (std::fabs(c0v) + std::fabs(c1v)) + 1e-300;
    bool ok0 = std::fabs(c0v - p0) <= rel_tol * (std::fabs(c0v) + floor_scale);
    bool ok1 = std::fabs(c1v - p1) <= rel_tol * (std::fabs(c1v) + floor_scale);
    p0 = c0v;
    p1 = c1v;
    if (lev >= 2 && ok0 && ok1) break;
  }
  *out0 = p0;
  *out1 = p1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Derived constants.

double DerivedConstants::c_xi(double delta) const {
  if (!(delta > 0.0 && delta < delta_star))
    throw ValidationError("c_xi: delta must lie in (0, delta_star)");
  return 1.0 / ((d - 1) * beta + 1.0 - 2.0 * alpha - delta);
}

DerivedConstants derived_constants(const ModelParams& params) {
  params.validate();
  const int d = params.d;
  const double alpha = params.alpha, eta = params.eta;
  DerivedConstants out;
  out.d = d;
  out.alpha = alpha;
  out.eta = eta;
  out.regime = classify_regime(alpha, eta, d);
  out.beta = (d - 1 + 2.0 * alpha * eta) / ((d - 1) * (2.0 * alpha + 1.0 - 2.0 * alpha * eta));
  out.delta_star = std::min(1.0 - alpha, (d - 1) * out.beta + 1.0 - 2.0 * alpha);
  out.bN0 = params.resolved_trace_c0() / d;

  // alpha1 = omega_{d-1} * iint (1-cos x) x^{-1-2a} (cos t)^{2a} (sin t)^{d-2} dx dt,
  // omega_{d-1} = 2 Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)) (normalized Haar marginal).
  // The double integral factorizes; each factor is done by adaptive quadrature
  // (tanh-sinh absorbs the x^{1-2a} and (cos t)^{2a} endpoint singularities).
  const double omega = 2.0 * gamma_fn(0.5 * d) / (std::sqrt(M_PI) * gamma_fn(0.5 * (d - 1)));
  const double inner = one_minus_cos_integral(alpha, 1e-12);
  const double angular = integrate_tanh_sinh(
      [&](double t) {
        return std::pow(std::cos(t), 2.0 * alpha) * std::pow(std::sin(t), d - 2);
      },
      0.0, M_PI_2, 1e-12);
  if (!std::isfinite(inner) || !std::isfinite(angular))
    throw NumericalError("derived_constants: alpha1 quadrature failed");
  out.alpha1 = omega * inner * angular;

  if (params.kernel_mode == KernelMode::self_similar) {
    out.c = params.self_similar_c;
  } else {
    // Tr C(0) = (a+b) * F_tot with F_tot = m^{-2a} B(d/2, a) / 2.
    double ftot = std::pow(params.m, -2.0 * alpha) * 0.5 * beta_fn(0.5 * d, alpha);
    double ab = params.resolved_trace_c0() / ftot;
    out.c = out.alpha1 * ab * (2.0 * alpha + 1.0 - 2.0 * alpha * eta) / (d + 2.0 * alpha);
  }
  out.c_tilde = d * (1.0 - alpha) * out.c;
  double base = out.c * (2.0 - 2.0 * alpha) * (1.0 - 2.0 * alpha + out.beta * (d - 1));
  out.k_ric = base > 0.0 ? 0.5 * std::pow(base, 1.0 / (1.0 - alpha)) : 0.0;
  return out;
}

double dissipation_constant_closed_form(double alpha, int d, double trace_c0) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("dissipation_constant_closed_form: alpha must lie in (0,1)");
  if (d < 2 || !(trace_c0 > 0.0))
    throw ValidationError("dissipation_constant_closed_form: bad d or trace_c0");
  // c_tilde = d/(d+2a) * TrC(0) * K1 * K2(a),
  //   K2(a) = (1-a) cos(pi a) Gamma(1-2a) Gamma(a+1/2) / Gamma(a+1),
  // with cos(pi a) Gamma(1-2a) taken through the reflection form so the
  // apparent pole at a = 1/2 cancels. K1 = 1/sqrt(pi): this is the value
  // consistent with the covariance normalization Tr C(0) = (a+b) * F_tot;
  // it is dimension-independent.
  const double k1 = 1.0 / std::sqrt(M_PI);
  double k2 = (1.0 - alpha) * cospi_gamma_one_minus_2a(alpha) * gamma_fn(alpha + 0.5) /
              gamma_fn(alpha + 1.0);
  return d / (d + 2.0 * alpha) * trace_c0 * k1 * k2;
}

double dissipation_constant_limit_alpha0(int d, double trace_c0) {
  (void)d;
  return trace_c0 * (1.0 / std::sqrt(M_PI)) * std::sqrt(M_PI);
}

double dissipation_constant_limit_alpha1(int d, double trace_c0) {
  return static_cast<double>(d) / (d + 2) * trace_c0 * (1.0 / std::sqrt(M_PI)) *
         std::sqrt(M_PI) / 4.0;
}

// ---------------------------------------------------------------------------
// IsotropicKernel

namespace {
std::atomic<bool> g_clamp_warned{false};
}

IsotropicKernel::IsotropicKernel(const ModelParams& params, const KernelOptions& opts)
    : params_(params), opts_(opts) {
  params_.validate();
  constants_ = derived_constants(params_);
  c0_ = params_.resolved_trace_c0() / (2.0 * params_.d);
  if (params_.kernel_mode == KernelMode::self_similar) return;

  double ftot = std::pow(params_.m, -2.0 * params_.alpha) * 0.5 *
                beta_fn(0.5 * params_.d, params_.alpha);
  double ab = params_.resolved_trace_c0() / ftot;
  a_spec_ = (1.0 - params_.eta) * ab;
  b_spec_ = params_.eta * ab;
  build_phi_table();

  if (!opts_.tabulate) return;
  int n = std::max(opts_.table_nodes, 8);
  table_.resize(n);
  double r_lo = opts_.r_min_factor / params_.m, r_hi = opts_.r_max_factor / params_.m;
  double llo = std::log(r_lo), lhi = std::log(r_hi);
  for (int i = 0; i < n; ++i) {
    double r = std::exp(llo + (lhi - llo) * i / (n - 1));
    Pair prime;
    Pair v = eval_pair(r, opts_.rel_tol, true, &prime);
    TableRow row;
    row.r = r;
    row.bL = v.bL;
    row.bN = v.bN;
    row.dlogbL = r * prime.bL / v.bL;
    row.dlogbN = r * prime.bN / v.bN;
    table_[i] = row;
  }
}

void IsotropicKernel::build_phi_table() {
  const int d = params_.d;
  const double alpha = params_.alpha;
  const int n = 1200;
  const double s_lo = 1e-12, s_hi = 40.0;
  for (int j = 0; j < 2; ++j) {
    phi_[j].log_lo = std::log(s_lo);
    phi_[j].step = (std::log(s_hi) - std::log(s_lo)) / (n - 1);
    phi_[j].logv.resize(n);
    phi_[j].slope.resize(n);
  }
  std::vector<double> v0(n), v1(n);
  for (int k = 0; k < n; ++k) {
    double s = std::exp(phi_[0].log_lo + k * phi_[0].step);
    v0[k] = phi_integral(d, alpha, s, 0, 1e-11);
    v1[k] = phi_integral(d, alpha, s, 1, 1e-11);
    phi_[0].logv[k] = std::log(v0[k]);
    phi_[1].logv[k] = std::log(v1[k]);
    // d log Phi_0 / d log s = -(d + 2 alpha) s^2 Phi_1 / Phi_0 (exact identity)
    phi_[0].slope[k] = -(d + 2.0 * alpha) * s * s * v1[k] / v0[k];
  }
  // Phi_1 slopes by central differences of the log table
  for (int k = 0; k < n; ++k) {
    int a = std::max(0, k - 1), b = std::min(n - 1, k + 1);
    phi_[1].slope[k] = (phi_[1].logv[b] - phi_[1].logv[a]) / ((b - a) * phi_[1].step);
  }
  phi_ready_ = true;
}

double IsotropicKernel::phi_lookup(int j, double s) const {
  const int d = params_.d;
  const double alpha = params_.alpha;
  if (s >= 40.0 || !phi_ready_) return phi_integral(d, alpha, s, j, 1e-10);
  const PhiTable& tb = phi_[j];
  double L = std::log(s);
  if (L <= tb.log_lo) return std::exp(tb.logv.front());  // Phi flattens to Phi(0)
  size_t n = tb.logv.size();
  size_t i = std::min(n - 2, static_cast<size_t>((L - tb.log_lo) / tb.step));
  double t = (L - (tb.log_lo + i * tb.step)) / tb.step;
  double y0 = tb.logv[i], y1 = tb.logv[i + 1], m0 = tb.slope[i], m1 = tb.slope[i + 1];
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return std::exp(h00 * y0 + h10 * tb.step * m0 + h01 * y1 + h11 * tb.step * m1);
}

IsotropicKernel::Pair IsotropicKernel::eval_pair(double r, double rel_tol, bool with_prime,
                                                 Pair* prime, bool use_cache) const {
  const int d = params_.d;
  const double alpha = params_.alpha, m = params_.m;
  const double kd = gamma_fn(0.5 * d) / (std::sqrt(M_PI) * gamma_fn(0.5 * (d - 1)));
  auto phi = [&](int j, double s) {
    return use_cache ? phi_lookup(j, s) : phi_integral(d, alpha, s, j, rel_tol * 0.1);
  };
  // weights against the u1-marginal, u1 = cos(theta):
  //   b_L:  (b/(d-1)) sin^2 + a cos^2
  //   b_N:  (b/(d-1)) (1 - sin^2/(d-1)) + a sin^2/(d-1)
  Pair out{0.0, 0.0};
  auto fpair = [&](double th, double* gL, double* gN) {
    double u1 = std::cos(th);
    double s2t = std::sin(th) * std::sin(th);
    double wL = (b_spec_ / (d - 1)) * s2t + a_spec_ * (1.0 - s2t);
    double wN = (b_spec_ / (d - 1)) * (1.0 - s2t / (d - 1)) + a_spec_ * s2t / (d - 1);
    double common = std::pow(u1 * r, 2.0 * alpha) * phi(0, r * m * u1) *
                    std::pow(std::sin(th), d - 2);
    *gL = wL * common;
    *gN = wN * common;
  };
  tanh_sinh_pair(fpair, 0.0, M_PI_2, rel_tol, &out.bL, &out.bN);
  out.bL *= 2.0 * kd;
  out.bN *= 2.0 * kd;
  if (with_prime) {
    auto fprime = [&](double th, double* gL, double* gN) {
      double u1 = std::cos(th);
      double s2t = std::sin(th) * std::sin(th);
      double wL = (b_spec_ / (d - 1)) * s2t + a_spec_ * (1.0 - s2t);
      double wN = (b_spec_ / (d - 1)) * (1.0 - s2t / (d - 1)) + a_spec_ * s2t / (d - 1);
      double s = r * m * u1;
      double phi0 = phi(0, s);
      double dphi = -(d + 2.0 * alpha) * s * phi(1, s);
      double common = std::pow(u1, 2.0 * alpha) *
                      (2.0 * alpha * std::pow(r, 2.0 * alpha - 1.0) * phi0 +
                       std::pow(r, 2.0 * alpha) * m * u1 * dphi) *
                      std::pow(std::sin(th), d - 2);
      *gL = wL * common;
      *gN = wN * common;
    };
    tanh_sinh_pair(fprime, 0.0, M_PI_2, rel_tol, &prime->bL, &prime->bN);
    prime->bL *= 2.0 * kd;
    prime->bN *= 2.0 * kd;
  }
  return out;
}

double IsotropicKernel::interp(double r, bool normal, bool prime) const {
  // self-similar: exact power law
  if (params_.kernel_mode == KernelMode::self_similar) {
    double c = constants_.c * (normal ? constants_.beta : 1.0);
    if (prime) return 2.0 * params_.alpha * c * std::pow(r, 2.0 * params_.alpha - 1.0);
    return c * std::pow(r, 2.0 * params_.alpha);
  }
  if (table_.empty()) {
    Pair pr;
    Pair v = eval_pair(r, opts_.rel_tol, prime, &pr);
    if (prime) return normal ? pr.bN : pr.bL;
    return normal ? v.bN : v.bL;
  }
  const auto& tb = table_;
  double L = std::log(r);
  double llo = std::log(tb.front().r), lhi = std::log(tb.back().r);
  auto val_at = [&](const TableRow& row) { return normal ? row.bN : row.bL; };
  auto slope_at = [&](const TableRow& row) { return normal ? row.dlogbN : row.dlogbL; };
  if (L <= llo) {
    // power-law extension with the first node's local exponent
    const TableRow& row = tb.front();
    double b = val_at(row) * std::exp(slope_at(row) * (L - llo));
    return prime ? slope_at(row) * b / r : b;
  }
  if (L >= lhi) {
    if (!g_clamp_warned.exchange(true))
      std::fprintf(stderr,
                   "kraichnan: kernel query r=%g beyond tabulated range; clamping\n", r);
    const TableRow& row = tb.back();
    return prime ? 0.0 : val_at(row);
  }
  double step = (lhi - llo) / (tb.size() - 1);
  size_t i = std::min(tb.size() - 2, static_cast<size_t>((L - llo) / step));
  double l0 = llo + i * step;
  double y0 = std::log(val_at(tb[i])), y1 = std::log(val_at(tb[i + 1]));
  double m0 = slope_at(tb[i]), m1 = slope_at(tb[i + 1]);
  // Fritsch-Carlson safeguard (monotone data; rarely binds with exact slopes)
  double sec = (y1 - y0) / step;
  if (sec > 0) {
    m0 = std::clamp(m0, 0.0, 3.0 * sec);
    m1 = std::clamp(m1, 0.0, 3.0 * sec);
  }
  double t = (L - l0) / step;
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  double y = h00 * y0 + h10 * step * m0 + h01 * y1 + h11 * step * m1;
  double b = std::exp(y);
  if (!prime) return b;
  double dh00 = 6 * t * (t - 1), dh10 = (1 - t) * (1 - 3 * t);
  double dh01 = 6 * t * (1 - t), dh11 = t * (3 * t - 2);
  double dydt = dh00 * y0 / step + dh10 * m0 + dh01 * y1 / step + dh11 * m1;
  return b * dydt / r;  // d b / d r = b * d log b / d log r / r
}

double IsotropicKernel::bL(double r) const {
  if (r < 0.0) throw ValidationError("bL: r must be >= 0");
  if (r == 0.0) return 0.0;
  return interp(r, false, false);
}

double IsotropicKernel::bN(double r) const {
  if (r < 0.0) throw ValidationError("bN: r must be >= 0");
  if (r == 0.0) return 0.0;
  return interp(r, true, false);
}

double IsotropicKernel::bL_prime(double r) const {
  if (r <= 0.0) throw ValidationError("bL_prime: r must be > 0");
  return interp(r, false, true);
}

double IsotropicKernel::bN_prime(double r) const {
  if (r <= 0.0) throw ValidationError("bN_prime: r must be > 0");
  return interp(r, true, true);
}

double IsotropicKernel::bL_exact(double r, double rel_tol) const {
  if (r < 0.0) throw ValidationError("bL_exact: r must be >= 0");
  if (r == 0.0) return 0.0;
  if (params_.kernel_mode == KernelMode::self_similar)
    return constants_.c * std::pow(r, 2.0 * params_.alpha);
  Pair pr;
  return eval_pair(r, rel_tol, false, &pr, /*use_cache=*/false).bL;
}

double IsotropicKernel::bN_exact(double r, double rel_tol) const {
  if (r < 0.0) throw ValidationError("bN_exact: r must be >= 0");
  if (r == 0.0) return 0.0;
  if (params_.kernel_mode == KernelMode::self_similar)
    return constants_.c * constants_.beta * std::pow(r, 2.0 * params_.alpha);
  Pair pr;
  return eval_pair(r, rel_tol, false, &pr, /*use_cache=*/false).bN;
}

std::vector<double> IsotropicKernel::q_matrix(const std::vector<double>& z) const {
  const int d = params_.d;
  if (static_cast<int>(z.size()) != d)
    throw ValidationError("q_matrix: z must have dimension d");
  std::vector<double> q(d * d, 0.0);
  double r2 = 0.0;
  for (double zi : z) r2 += zi * zi;
  if (r2 == 0.0) return q;
  double r = std::sqrt(r2);
  double bl = bL(r), bn = bN(r);
  for (int i = 0; i < d; ++i) {
    q[i * d + i] = bn;
    for (int jj = 0; jj < d; ++jj) q[i * d + jj] += (bl - bn) * z[i] * z[jj] / r2;
  }
  return q;
}

double IsotropicKernel::ellipticity_floor(double r0, double R, int n_samples) const {
  if (!(r0 > 0.0)) throw ValidationError("ellipticity_floor: r0 must be > 0");
  if (R < r0) throw ValidationError("ellipticity_floor: need r0 <= R");
  if (n_samples < 1) throw ValidationError("ellipticity_floor: n_samples must be >= 1");
  double lo = std::log(r0), hi = std::log(R);
  double best = std::numeric_limits<double>::infinity();
  int n = (r0 == R) ? 1 : n_samples;
  for (int i = 0; i < n; ++i) {
    double r = std::exp(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    best = std::min(best, std::min(bL(r), bN(r)));
  }
  return best;
}

}  // namespace kraichnan
