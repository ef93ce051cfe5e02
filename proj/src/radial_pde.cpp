// SPDX-License-Identifier: Apache-2.0
#include "kraichnan/radial_pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kraichnan/errors.hpp"
#include "kraichnan/quadrature.hpp"
#include "kraichnan/special_functions.hpp"

namespace kraichnan {

RadialGrid build_grid(double h_min, double R_max, double growth) {
  if (!(h_min > 0.0) || !(R_max > h_min))
    throw ValidationError("build_grid: need 0 < h_min < R_max");
  if (!(growth > 1.0 && growth <= 1.1))
    throw ValidationError("build_grid: growth must lie in (1, 1.1]");
  // predicted node count; reject absurd requests before allocating
  double h_cap = R_max / 128.0;
  double n_geo = std::log(std::max(h_cap / h_min, 1.0)) / std::log(growth);
  double n_uni = R_max / h_cap;
  if (n_geo + n_uni > 1e6) throw ValidationError("build_grid: grid would exceed 1e6 nodes");

  RadialGrid g;
  g.h_min = h_min;
  g.R_max = R_max;
  g.growth = growth;
  g.nodes.push_back(0.0);
  double r = 0.0, h = h_min;
  while (r < R_max) {
    r += h;
    if (r >= R_max - 0.5 * h) {
      g.nodes.push_back(R_max);
      break;
    }
    g.nodes.push_back(r);
    if (h < h_cap) h = std::min(h * growth, h_cap);  // cap growth; never shrink
  }
  if (g.nodes.size() < 64)
    throw ValidationError("build_grid: fewer than 64 nodes; refine h_min or growth");
  return g;
}

namespace {

struct Tridiag {
  std::vector<double> lower, diag, upper;  // lower[0], upper[N-1] unused
};

// Thomas algorithm; asserts diagonal dominance as it factors.
void solve_tridiag(const Tridiag& m, std::vector<double>& rhs) {
  size_t n = rhs.size();
  std::vector<double> cp(n), dp(n);
  double den = m.diag[0];
  if (std::fabs(den) < 1e-300) throw NumericalError("tridiagonal solve: zero pivot at row 0");
  cp[0] = m.upper[0] / den;
  dp[0] = rhs[0] / den;
  for (size_t i = 1; i < n; ++i) {
    den = m.diag[i] - m.lower[i] * cp[i - 1];
    if (std::fabs(den) < 1e-300) {
      std::ostringstream oss;
      oss << "tridiagonal solve: vanishing pivot at row " << i;
      throw NumericalError(oss.str());
    }
    cp[i] = m.upper[i] / den;
    dp[i] = (rhs[i] - m.lower[i] * dp[i - 1]) / den;
  }
  rhs[n - 1] = dp[n - 1];
  for (size_t i = n - 1; i-- > 0;) rhs[i] = dp[i] - cp[i] * rhs[i + 1];
}

// Spatial operator rows: L f at node i = a_i f_{i-1} + d_i f_i + c_i f_{i+1}.
struct OperatorRows {
  std::vector<double> a, d, c;
};

// Transport-form rows. Node 0 is closed by the symmetry ghost node with
// coefficients sampled at r_1; the b-part coefficient
//   (1-alpha) * max(0, (1-2 alpha) b_L(r_1) + (d-1) b_N(r_1))
// reproduces the r^{2-2alpha} boundary layer of the vanishing-viscosity
// solution (and vanishes identically in the coalescing regime, where the
// origin is absorbing and the energy is conserved).
OperatorRows transport_rows(const IsotropicKernel& kernel, const RadialGrid& g,
                            const PdeConfig& cfg) {
  const auto& r = g.nodes;
  const size_t n = r.size();
  const int d = kernel.params().d;
  const double alpha = kernel.params().alpha;
  const double kap = cfg.kappa, c0 = kernel.c0();
  OperatorRows rows;
  rows.a.assign(n, 0.0);
  rows.d.assign(n, 0.0);
  rows.c.assign(n, 0.0);

  {  // origin row
    double bl1 = kernel.bL(r[1]), bn1 = kernel.bN(r[1]);
    double db = (1.0 - alpha) * std::max(0.0, (1.0 - 2.0 * alpha) * bl1 + (d - 1) * bn1);
    double coef = ((1.0 - kap) * db + 2.0 * c0 * kap * d) * 2.0 / (r[1] * r[1]);
    rows.c[0] = coef;
    rows.d[0] = -coef;
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i];
    double bl = kernel.bL(r[i]), bn = kernel.bN(r[i]);
    double B = (1.0 - kap) * bl + 2.0 * c0 * kap;
    double W = ((1.0 - kap) * (d - 1) * bn + 2.0 * c0 * kap * (d - 1)) / r[i];
    // second difference
    double a2 = 2.0 / (hm * (hm + hp)), c2 = 2.0 / (hp * (hm + hp)), d2 = -2.0 / (hm * hp);
    // first derivative (second order on the nonuniform stencil)
    double a1 = -hp / (hm * (hm + hp)), c1 = hm / (hp * (hm + hp));
    double d1 = (hp - hm) / (hm * hp);
    double ai = B * a2 + W * a1;
    double ci = B * c2 + W * c1;
    if (ai < 0.0) {  // cell Peclet exceeded: local first-order upwind for the drift
      ai = B * a2;
      ci = B * c2 + W / hp;
      rows.a[i] = ai;
      rows.c[i] = ci;
      rows.d[i] = -(B * (a2 + c2) + W / hp);
      continue;
    }
    rows.a[i] = ai;
    rows.c[i] = ci;
    rows.d[i] = B * d2 + W * d1;
  }
  // outer row handled by the boundary condition in the stepper
  return rows;
}

// Conservative (finite-volume) rows for the divergence-free continuity mode.
// Interior cells i >= 1 use volumes V_i = r_i^{d-1} (r_{i+1/2} - r_{i-1/2}) and
// face fluxes F_{i+1/2} = r^{d-1} D (G_{i+1}-G_i)/h at the midpoint, with
// D = (1-k) b_L + 2 c0 k. The inner face of cell 1 carries no flux, so the
// recorded mass sum over i >= 1 is conserved exactly (up to the outer flux).
// Node 0 is a diagnostic value slaved to the interior cusp.
OperatorRows continuity_rows(const IsotropicKernel& kernel, const RadialGrid& g,
                             const PdeConfig& cfg) {
  const auto& r = g.nodes;
  const size_t n = r.size();
  const int d = kernel.params().d;
  const double alpha = kernel.params().alpha;
  const double kap = cfg.kappa, c0 = kernel.c0();
  OperatorRows rows;
  rows.a.assign(n, 0.0);
  rows.d.assign(n, 0.0);
  rows.c.assign(n, 0.0);

  auto diffusivity = [&](double rr) { return (1.0 - kap) * kernel.bL(rr) + 2.0 * c0 * kap; };

  {  // origin diagnostic row: rate consistent with the r^{2-2alpha} flux layer
    double db = (1.0 - alpha) * d * kernel.bL(r[1]);
    double coef = ((1.0 - kap) * db + 2.0 * c0 * kap * d) * 2.0 / (r[1] * r[1]);
    rows.c[0] = coef;
    rows.d[0] = -coef;
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    double r_lo = 0.5 * (r[i - 1] + r[i]), r_hi = 0.5 * (r[i] + r[i + 1]);
    double vol = std::pow(r[i], d - 1) * (r_hi - r_lo);
    double f_hi = std::pow(r_hi, d - 1) * diffusivity(r_hi) / (r[i + 1] - r[i]);
    double f_lo =
        (i == 1) ? 0.0 : std::pow(r_lo, d - 1) * diffusivity(r_lo) / (r[i] - r[i - 1]);
    rows.a[i] = f_lo / vol;
    rows.c[i] = f_hi / vol;
    rows.d[i] = -(f_lo + f_hi) / vol;
  }
  return rows;
}

double mass_sum(const RadialGrid& g, const std::vector<double>& f, int d) {
  const auto& r = g.nodes;
  double s = 0.0;
  for (size_t i = 1; i < r.size(); ++i) {
    double r_lo = 0.5 * (r[i - 1] + r[i]);
    double r_hi = (i + 1 < r.size()) ? 0.5 * (r[i] + r[i + 1]) : r[i];
    s += f[i] * std::pow(r[i], d - 1) * (r_hi - r_lo);
  }
  return sphere_area(d) * s;
}

}  // namespace

PdeRun evolve(const IsotropicKernel& kernel, const RadialGrid& grid, const PdeConfig& config,
              const std::function<double(double)>& f0, double t_end) {
  if (!(config.kappa >= 0.0 && config.kappa < 0.5))
    throw ValidationError("evolve: kappa must lie in [0, 1/2)");
  if (!(config.theta >= 0.5 && config.theta <= 1.0))
    throw ValidationError("evolve: theta must lie in [1/2, 1]");
  if (config.mode == PdeMode::continuity_divfree && kernel.params().eta != 1.0)
    throw ValidationError("evolve: continuity_divfree requires a divergence-free kernel (eta = 1)");
  if (grid.size() < 3) throw ValidationError("evolve: degenerate grid");

  const auto& r = grid.nodes;
  const size_t n = r.size();
  const int d = kernel.params().d;
  const double alpha = kernel.params().alpha;

  std::vector<double> f(n);
  for (size_t i = 0; i < n; ++i) f[i] = f0(r[i]);
  for (double v : f)
    if (!std::isfinite(v)) throw ValidationError("evolve: initial datum is not finite");

  OperatorRows rows = (config.mode == PdeMode::transport) ? transport_rows(kernel, grid, config)
                                                          : continuity_rows(kernel, grid, config);

  const double f_outer = f[n - 1];
  const double max0 = [&] {
    double mx = 0.0;
    for (double v : f) mx = std::max(mx, std::fabs(v));
    return mx;
  }();

  PdeRun run;
  run.grid = grid;
  run.config = config;
  run.model = kernel.params();
  std::vector<double> obs = config.observable_times;
  std::sort(obs.begin(), obs.end());
  obs.erase(std::remove_if(obs.begin(), obs.end(),
                           [&](double t) { return t < 0.0 || t > t_end * (1 + 1e-12); }),
            obs.end());
  if (obs.empty() || obs.back() < t_end) obs.push_back(t_end);

  double fit_lo = config.fit_r_lo > 0 ? config.fit_r_lo : 5.0 * grid.h_min;
  double fit_hi = config.fit_r_hi > 0 ? config.fit_r_hi : 0.05 * config.corr_length;

  auto record = [&](double t) {
    run.times.push_back(t);
    run.profiles.push_back({t, f});
    run.energy.push_back(f[0]);
    double gamma0 = 2.0 - 2.0 * alpha;
    run.seminorm_minus.push_back(
        increment_seminorm(r, f, gamma0 - config.seminorm_delta, config.seminorm_l));
    run.seminorm_plus.push_back(
        increment_seminorm(r, f, gamma0 + config.seminorm_delta, config.seminorm_l));
    if (t > 0.0) {
      try {
        AmplitudeFit af = singular_amplitude(grid, f, gamma0, fit_lo, fit_hi);
        run.amplitude.push_back(af.amplitude);
        run.amplitude_exponent.push_back(af.fitted_exponent);
      } catch (const FitError&) {
        run.amplitude.push_back(0.0);
        run.amplitude_exponent.push_back(0.0);
      }
    } else {
      run.amplitude.push_back(0.0);
      run.amplitude_exponent.push_back(0.0);
    }
    run.mass.push_back(config.mode == PdeMode::continuity_divfree ? mass_sum(grid, f, d) : 0.0);
    double bl_edge = kernel.bL(r[n - 1]);
    run.boundary_flux.push_back(std::fabs(bl_edge * (f[n - 1] - f[n - 2]) / (r[n - 1] - r[n - 2])));
  };

  record(0.0);

  Tridiag mat;
  mat.lower.assign(n, 0.0);
  mat.diag.assign(n, 0.0);
  mat.upper.assign(n, 0.0);
  std::vector<double> rhs(n);

  double t = 0.0;
  size_t next_obs = (obs.front() == 0.0) ? 1 : 0;
  const double th = config.theta;
  long step_no = 0;
  while (t < t_end - 1e-15 * t_end && next_obs < obs.size()) {
    double dt = config.dt;
    if (config.dt_geometric > 0.0)
      dt = std::min(config.dt, std::max(config.dt * 1e-6, config.dt_geometric * t));
    if (t + dt > obs[next_obs]) dt = obs[next_obs] - t;
    if (dt <= 0.0) {
      ++next_obs;
      continue;
    }

    // (I - th dt L) f_new = (I + (1-th) dt L) f_old, outer boundary per BC
    for (size_t i = 0; i + 1 < n; ++i) {
      mat.lower[i] = -th * dt * rows.a[i];
      mat.diag[i] = 1.0 - th * dt * rows.d[i];
      mat.upper[i] = -th * dt * rows.c[i];
      double lf = rows.a[i] * (i > 0 ? f[i - 1] : 0.0) + rows.d[i] * f[i] + rows.c[i] * f[i + 1];
      rhs[i] = f[i] + (1.0 - th) * dt * lf;
    }
    if (config.outer_bc == OuterBc::dirichlet_zero) {
      mat.lower[n - 1] = 0.0;
      mat.diag[n - 1] = 1.0;
      mat.upper[n - 1] = 0.0;
      rhs[n - 1] = f_outer;
    } else {  // homogeneous Neumann: f_N = f_{N-1}
      mat.lower[n - 1] = -1.0;
      mat.diag[n - 1] = 1.0;
      mat.upper[n - 1] = 0.0;
      rhs[n - 1] = 0.0;
    }
    std::vector<double> fn = rhs;
    solve_tridiag(mat, fn);

    // componentwise backward-error check |Ax-b| <= tol (|A||x| + |b|)
    double worst_be = 0.0;
    for (size_t i = 1; i + 1 < n; ++i) {
      double lhs = mat.lower[i] * fn[i - 1] + mat.diag[i] * fn[i] + mat.upper[i] * fn[i + 1];
      double scale = std::fabs(mat.lower[i] * fn[i - 1]) + std::fabs(mat.diag[i] * fn[i]) +
                     std::fabs(mat.upper[i] * fn[i + 1]) + std::fabs(rhs[i]) + 1e-300;
      worst_be = std::max(worst_be, std::fabs(lhs - rhs[i]) / scale);
    }
    if (!(worst_be <= 1e-10)) {
      std::ostringstream oss;
      oss << "evolve: solver backward error " << worst_be << " at t=" << t << " step " << step_no;
      throw NumericalError(oss.str());
    }
    double mx = 0.0;
    for (double v : fn) {
      if (!std::isfinite(v)) {
        std::ostringstream oss;
        oss << "evolve: non-finite value at t=" << t + dt << " step " << step_no;
        throw NumericalError(oss.str());
      }
      mx = std::max(mx, std::fabs(v));
    }
    if (th >= 1.0 - 1e-12 && mx > max0 * (1.0 + 1e-10)) {
      std::ostringstream oss;
      oss << "evolve: discrete maximum principle violated (" << mx << " > " << max0
          << ") at t=" << t + dt;
      throw NumericalError(oss.str());
    }

    f.swap(fn);
    t += dt;
    ++step_no;
    if (std::fabs(t - obs[next_obs]) <= 1e-12 * std::max(1.0, obs[next_obs])) {
      record(obs[next_obs]);
      ++next_obs;
    }
  }
  return run;
}

std::vector<std::pair<double, double>> energy_series(const PdeRun& run) {
  std::vector<std::pair<double, double>> out;
  out.reserve(run.times.size());
  for (size_t i = 0; i < run.times.size(); ++i) out.push_back({run.times[i], run.energy[i]});
  return out;
}

double increment_seminorm(const std::vector<double>& nodes, const std::vector<double>& values,
                          double gamma, double l) {
  if (!(gamma > 0.0 && gamma <= 2.0))
    throw ValidationError("increment_seminorm: gamma must lie in (0, 2]");
  double f0 = values[0], best = 0.0;
  for (size_t i = 1; i < nodes.size() && nodes[i] < l; ++i)
    best = std::max(best, std::fabs(values[i] - f0) / std::pow(nodes[i], gamma));
  return best;
}

AmplitudeFit singular_amplitude(const RadialGrid& grid, const std::vector<double>& values,
                                double gamma, double r_lo, double r_hi) {
  if (!(r_lo > 0.0 && r_hi > r_lo))
    throw FitError("singular_amplitude: bad fit window");
  double f0 = values[0];
  std::vector<double> lx, ly;
  for (size_t i = 1; i < grid.nodes.size(); ++i) {
    double r = grid.nodes[i];
    if (r < r_lo || r > r_hi) continue;
    double diff = f0 - values[i];
    if (!(diff > 0.0)) {
      std::ostringstream oss;
      oss << "singular_amplitude: non-positive increment f(0)-f(r) at r=" << r;
      throw FitError(oss.str());
    }
    lx.push_back(std::log(r));
    ly.push_back(std::log(diff));
  }
  if (lx.size() < 4) throw FitError("singular_amplitude: fewer than 4 points in window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t np = lx.size();
  for (size_t i = 0; i < np; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
  // amplitude read off at the imposed exponent gamma
  double log_amp = (sy - gamma * sx) / np;
  AmplitudeFit out;
  out.amplitude = std::exp(log_amp);
  out.fitted_exponent = slope;
  out.n_points = static_cast<int>(np);
  return out;
}

std::vector<XiRow> xi_diagnostic(const IsotropicKernel& kernel, double delta,
                                 const std::vector<double>& r_grid) {
  const auto& k = kernel.constants();
  if (!(k.delta_star > 0.0))
    throw ValidationError("xi_diagnostic: diffusive regime required (delta_star > 0)");
  if (!(delta > 0.0 && delta < k.delta_star))
    throw ValidationError("xi_diagnostic: delta must lie in (0, delta_star)");
  const int d = kernel.params().d;
  const double alpha = kernel.params().alpha;

  auto dxi_at = [&](double r) {
    // dxi(r) = int_0^r q(rho)/b_L(rho) exp(-(d-1) int_rho^r b_N(u)/(b_L(u) u) du) drho
    auto inner_exp = [&](double rho) {
      auto g = [&](double u) { return kernel.bN(u) / (kernel.bL(u) * u); };
      double I = integrate_tanh_sinh(g, rho, r, 1e-9);
      return std::exp(-(d - 1) * I);
    };
    auto f = [&](double rho) {
      return std::pow(rho, -delta) / kernel.bL(rho) * inner_exp(rho);
    };
    return integrate_tanh_sinh(f, 0.0, r, 1e-8);
  };

  std::vector<XiRow> rows;
  rows.reserve(r_grid.size());
  double xi = 0.0, prev_r = 0.0, prev_dxi = 0.0;
  for (double r : r_grid) {
    if (!(r > prev_r)) throw ValidationError("xi_diagnostic: r_grid must be increasing and > 0");
    double dxi = dxi_at(r);
    // cumulative integral, exact on local power laws
    if (prev_r == 0.0) {
      double p = 1.0 - 2.0 * alpha - delta;  // dxi ~ c r^p near 0, p > -1
      xi += dxi * r / (p + 1.0);
    } else {
      double p = std::log(dxi / prev_dxi) / std::log(r / prev_r);
      xi += (dxi * r - prev_dxi * prev_r) / (p + 1.0);
    }
    rows.push_back({r, xi, dxi, dxi / std::pow(r, 1.0 - 2.0 * alpha - delta)});
    prev_r = r;
    prev_dxi = dxi;
  }
  return rows;
}

}  // namespace kraichnan
