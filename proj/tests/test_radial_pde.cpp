// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "kraichnan/errors.hpp"
#include "kraichnan/radial_pde.hpp"
#include "oracles.hpp"

using namespace kraichnan;

namespace {

ModelParams self_similar(int d, double alpha, double eta, double c = 1.0) {
  ModelParams p;
  p.d = d;
  p.alpha = alpha;
  p.eta = eta;
  p.kernel_mode = KernelMode::self_similar;
  p.self_similar_c = c;
  return p;
}

ModelParams zero_kernel(int d) {
  // self-similar with a vanishingly small amplitude stands in for b = 0
  ModelParams p = self_similar(d, 0.5, 1.0, 1e-300);
  return p;
}

std::vector<double> geometric_times(double t0, double t1, int per_decade) {
  std::vector<double> ts;
  for (double t = t0; t < t1 * 0.9999; t *= std::pow(10.0, 1.0 / per_decade)) ts.push_back(t);
  ts.push_back(t1);
  return ts;
}

}  // namespace

TEST_CASE("build_grid: node counts and guards") {
  RadialGrid g = build_grid(1e-4, 10.0, 1.05);
  CHECK(g.nodes.front() == 0.0);
  CHECK(g.nodes[1] == doctest::Approx(1e-4));
  CHECK(g.nodes.back() == doctest::Approx(10.0));
  CHECK(g.size() >= 200);
  CHECK(g.size() <= 320);
  double last_spacing = g.nodes[g.size() - 1] - g.nodes[g.size() - 2];
  CHECK(last_spacing <= 0.5);
  for (size_t i = 1; i < g.size(); ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
  // deterministic
  RadialGrid g2 = build_grid(1e-4, 10.0, 1.05);
  CHECK(g2.nodes == g.nodes);

  CHECK_THROWS_AS(build_grid(1e-4, 10.0, 1.0 + 1e-9), ValidationError);  // count guard
  CHECK_THROWS_AS(build_grid(5.0, 10.0, 1.05), ValidationError);         // degenerate
  CHECK_THROWS_AS(build_grid(-1.0, 10.0, 1.05), ValidationError);
  CHECK_THROWS_AS(build_grid(1e-4, 10.0, 1.2), ValidationError);
}

TEST_CASE("constant data are exact solutions") {
  ModelParams p = self_similar(2, 0.5, 1.0);
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-3, 5.0, 1.05);
  PdeConfig cfg;
  cfg.kappa = 0.1;
  cfg.observable_times = {0.25, 1.0};
  PdeRun run = evolve(kern, g, cfg, [](double) { return 3.5; }, 1.0);
  for (const auto& prof : run.profiles)
    for (double v : prof.values) CHECK(v == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("zero data stay zero") {
  ModelParams p = self_similar(2, 0.5, 1.0);
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-3, 5.0, 1.05);
  PdeConfig cfg;
  cfg.observable_times = {1.0};
  PdeRun run = evolve(kern, g, cfg, [](double) { return 0.0; }, 1.0);
  for (double v : run.energy) CHECK(v == 0.0);
}

TEST_CASE("heat-kernel oracle: solution accuracy and refinement order") {
  // b == 0 and kappa > 0: pure radial heat equation with D = 2 c0 kappa
  const int d = 2;
  ModelParams p = zero_kernel(d);
  p.trace_c0 = 2.0 * d;  // c0 = 1
  IsotropicKernel kern(p);
  const double kap = 0.25, D = 2.0 * 1.0 * kap, sigma = 1.0, T = 0.5;

  auto max_err = [&](double h) {
    RadialGrid g = build_grid(h, 12.0, 1.02);
    PdeConfig cfg;
    cfg.kappa = kap;
    cfg.dt = h * h * 25.0;  // temporal error subordinate to spatial
    cfg.observable_times = {T};
    PdeRun run = evolve(kern, g, cfg, [&](double r) { return oracle::heat_gaussian(D, sigma, d, 0, r); }, T);
    const auto& f = run.profiles.back().values;
    double err = 0.0;
    for (size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::fabs(f[i] - oracle::heat_gaussian(D, sigma, d, T, g.nodes[i])));
    return err;
  };
  double e1 = max_err(0.05), e2 = max_err(0.025);
  double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
  CHECK(e2 < 3e-3);
}

TEST_CASE("self-similar rescaling invariance") {
  // evolving the rescaled datum f0(./lam) for time lam^{2-2a} t reproduces the
  // rescaled solution
  const double alpha = 0.5, lam = 2.0, T = 0.2;
  ModelParams p = self_similar(2, alpha, 1.0, 1.0);
  IsotropicKernel kern(p);
  PdeConfig cfg;
  cfg.kappa = 0.0;
  cfg.dt = 2e-4;
  cfg.observable_times = {T};
  RadialGrid g1 = build_grid(2e-5, 8.0, 1.03);
  PdeRun run1 = evolve(kern, g1, cfg, [](double r) { return std::exp(-r * r / 4.0); }, T);

  double Ts = std::pow(lam, 2.0 - 2.0 * alpha) * T;
  PdeConfig cfg2 = cfg;
  cfg2.dt = cfg.dt * std::pow(lam, 2.0 - 2.0 * alpha);
  cfg2.observable_times = {Ts};
  RadialGrid g2 = build_grid(2e-5 * lam, 8.0 * lam, 1.03);
  PdeRun run2 = evolve(kern, g2, cfg2, [&](double r) { return std::exp(-(r / lam) * (r / lam) / 4.0); }, Ts);

  // compare f1(T, r) with f2(lam^{2-2a} T, lam r) on shared radii
  const auto& f1 = run1.profiles.back().values;
  const auto& f2 = run2.profiles.back().values;
  for (size_t i = 0; i < g1.size(); i += 16) {
    // nodes of g2 are exactly lam * nodes of g1 only approximately; interpolate
    double target = g1.nodes[i] * lam;
    if (target >= g2.R_max) break;
    size_t j = 1;
    while (j + 1 < g2.size() && g2.nodes[j + 1] < target) ++j;
    double w = (target - g2.nodes[j]) / (g2.nodes[j + 1] - g2.nodes[j]);
    double v2 = (1 - w) * f2[j] + w * f2[j + 1];
    CHECK(v2 == doctest::Approx(f1[i]).epsilon(0.02));
  }
}

TEST_CASE("maximum principle and positive-type monotonicity") {
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-4, 10.0, 1.05);
  PdeConfig cfg;
  cfg.kappa = 0.0;
  cfg.dt = 1e-3;
  cfg.dt_geometric = 0.02;
  cfg.observable_times = geometric_times(1e-3, 1.0, 6);
  PdeRun run = evolve(kern, g, cfg, [](double r) { return std::exp(-r * r / 4.0); }, 1.0);
  double f00 = run.energy.front();
  for (size_t i = 0; i < run.times.size(); ++i) {
    const auto& f = run.profiles[i].values;
    double mx = 0.0;
    for (double v : f) mx = std::max(mx, std::fabs(v));
    CHECK(mx <= f00 * (1.0 + 1e-10));
    CHECK(run.energy[i] == doctest::Approx(mx).epsilon(1e-9));  // f(t,0) is the max
    if (i > 0) CHECK(run.energy[i] <= run.energy[i - 1] + 1e-12);
  }
}

TEST_CASE("continuity mode: exact mass conservation and eta guard") {
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-4, 10.0, 1.05);
  PdeConfig cfg;
  cfg.mode = PdeMode::continuity_divfree;
  cfg.kappa = 0.0;
  cfg.dt = 1e-3;
  cfg.dt_geometric = 0.02;
  cfg.observable_times = geometric_times(1e-3, 0.5, 4);
  double w = 0.02;
  PdeRun run = evolve(kern, g, cfg, [&](double r) { return std::exp(-r * r / (2 * w * w)); }, 0.5);
  double m0 = run.mass.front();
  CHECK(m0 > 0.0);
  for (double m : run.mass) CHECK(std::fabs(m - m0) / m0 < 1e-6);

  ModelParams bad = self_similar(2, 0.5, 0.7, 1.0);
  IsotropicKernel kb(bad);
  CHECK_THROWS_AS(evolve(kb, g, cfg, [](double) { return 1.0; }, 0.1), ValidationError);
}

TEST_CASE("energy refinement: halving h and dt at least halves the change") {
  // first-order in dt, second-order in dr on the heat oracle
  const int d = 2;
  ModelParams p = zero_kernel(d);
  p.trace_c0 = 2.0 * d;
  IsotropicKernel kern(p);
  const double kap = 0.25, D = 2.0 * kap, T = 0.5;
  auto energy_T = [&](double h, double dt) {
    RadialGrid g = build_grid(h, 12.0, 1.02);
    PdeConfig cfg;
    cfg.kappa = kap;
    cfg.dt = dt;
    cfg.observable_times = {T};
    PdeRun run = evolve(kern, g, cfg, [&](double r) { return oracle::heat_gaussian(D, 1.0, d, 0, r); }, T);
    return run.energy.back();
  };
  double exact = oracle::heat_gaussian(D, 1.0, d, T, 0.0);
  double c1 = std::fabs(energy_T(0.04, 4e-3) - exact);
  double c2 = std::fabs(energy_T(0.02, 1e-3) - exact);
  CHECK(c2 * 2.0 <= c1);
}

TEST_CASE("increment seminorm: exact cases") {
  RadialGrid g = build_grid(1e-3, 2.0, 1.05);
  std::vector<double> vals(g.size());
  // f(r) = r^gamma -> seminorm 1 exactly
  double gamma = 0.7;
  for (size_t i = 0; i < g.size(); ++i) vals[i] = std::pow(g.nodes[i], gamma);
  CHECK(increment_seminorm(g.nodes, vals, gamma, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  // constants -> 0
  std::fill(vals.begin(), vals.end(), 2.0);
  CHECK(increment_seminorm(g.nodes, vals, gamma, 1.0) == 0.0);
  // Gaussian against a dense direct maximization
  for (size_t i = 0; i < g.size(); ++i) vals[i] = std::exp(-g.nodes[i] * g.nodes[i] / 4.0);
  double s = increment_seminorm(g.nodes, vals, 1.0, 0.5);
  double dense = 0.0;
  for (double r = 1e-5; r < 0.5; r += 1e-5)
    dense = std::max(dense, (1.0 - std::exp(-r * r / 4.0)) / r);
  CHECK(s <= dense * (1.0 + 1e-12));  // sup over grid nodes cannot exceed the dense sup
  CHECK(s >= dense * 0.95);
}

TEST_CASE("singular amplitude: exact synthetic power law") {
  RadialGrid g = build_grid(1e-4, 2.0, 1.05);
  std::vector<double> vals(g.size());
  for (size_t i = 0; i < g.size(); ++i) vals[i] = 1.0 - 0.7 * std::pow(g.nodes[i], 1.0);
  AmplitudeFit fit = singular_amplitude(g, vals, 1.0, 5e-4, 0.05);
  CHECK(fit.amplitude == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(fit.fitted_exponent == doctest::Approx(1.0).epsilon(1e-10));
  // non-monotone data in the window -> fit error
  vals[10] = 2.0;
  CHECK_THROWS_AS(singular_amplitude(g, vals, 1.0, 5e-4, 0.05), FitError);
}

TEST_CASE("xi diagnostic: ratio converges to c_xi") {
  // self-similar, d=2, alpha=0.5, eta=1 (beta=2), delta=0.1: c_xi = 1/1.9
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  std::vector<double> rg;
  for (double r = 1e-5; r <= 1.1e-3; r *= 2.0) rg.push_back(r);
  auto rows = xi_diagnostic(kern, 0.1, rg);
  double c_xi = kern.constants().c_xi(0.1);
  CHECK(c_xi == doctest::Approx(1.0 / 1.9).epsilon(1e-12));
  for (const auto& row : rows) {
    if (row.r <= 1e-3) CHECK(row.ratio == doctest::Approx(c_xi).epsilon(0.01));
  }
  // xi strictly increasing
  for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].xi > rows[i - 1].xi);
  // delta -> 0+ continuity: c_xi(1e-9) close to 1/((d-1)beta + 1 - 2a)
  CHECK(kern.constants().c_xi(1e-9) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(xi_diagnostic(kern, 0.6, rg), ValidationError);  // delta >= delta_star
}

TEST_CASE("continuity mode reproduces the exact similarity profile at alpha = 1/2") {
  // with b_L = r (c = 1, alpha = 1/2) the Dirac solution of the conservative
  // radial operator is G(t,r) = A t^{-d} exp(-r/t), any d
  const int d = 2;
  ModelParams p = self_similar(d, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-5, 20.0, 1.04);
  PdeConfig cfg;
  cfg.mode = PdeMode::continuity_divfree;
  cfg.dt = 1e-3;
  cfg.dt_geometric = 0.004;
  cfg.observable_times = {0.5, 1.0};
  double w = 1e-3;
  PdeRun run = evolve(kern, g, cfg, [&](double r) { return std::exp(-r * r / (2 * w * w)); }, 1.0);
  for (size_t k = 1; k < run.times.size(); ++k) {
    double t = run.times[k];
    const auto& f = run.profiles[k].values;
    double ratio0 = f[0];
    for (size_t i = 0; i < g.size(); i += 8) {
      double expect = ratio0 * std::exp(-g.nodes[i] / t);
      if (expect < 1e-6 * ratio0) break;
      CHECK(f[i] == doctest::Approx(expect).epsilon(0.03));
    }
    // amplitude scales like t^{-d}
    if (k == 2) CHECK(run.energy[2] / run.energy[1] == doctest::Approx(std::pow(0.5, d)).epsilon(0.05));
  }
}

TEST_CASE("evolve guards: kappa and theta domains") {
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-3, 5.0, 1.05);
  PdeConfig cfg;
  cfg.observable_times = {0.1};
  cfg.kappa = 0.7;
  CHECK_THROWS_AS(evolve(kern, g, cfg, [](double) { return 1.0; }, 0.1), ValidationError);
  cfg.kappa = 0.0;
  cfg.theta = 0.2;
  CHECK_THROWS_AS(evolve(kern, g, cfg, [](double) { return 1.0; }, 0.1), ValidationError);
  cfg.theta = 1.0;
  CHECK_THROWS_AS(evolve(kern, g, cfg, [](double) { return std::nan(""); }, 0.1),
                  ValidationError);
}

TEST_CASE("singular amplitude on a smooth (heat) run fits exponent ~ 2") {
  ModelParams p = zero_kernel(2);
  p.trace_c0 = 4.0;
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-4, 12.0, 1.03);
  PdeConfig cfg;
  cfg.kappa = 0.25;
  cfg.dt = 1e-4;
  cfg.observable_times = {0.2};
  PdeRun run = evolve(kern, g, cfg, [](double r) { return std::exp(-r * r / 4.0); }, 0.2);
  AmplitudeFit fit = singular_amplitude(g, run.profiles.back().values, 2.0, 5e-4, 0.05);
  CHECK(fit.fitted_exponent == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("uniform-in-kappa seminorm bound") {
  // time-integrated minus-seminorm bounded by a kappa-independent constant
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  RadialGrid g = build_grid(1e-4, 10.0, 1.05);
  const double T = 1.0;
  std::vector<double> integrals;
  for (double kap : {0.0, 0.01, 0.1, 0.4}) {
    PdeConfig cfg;
    cfg.kappa = kap;
    cfg.dt = 1e-3;
    cfg.dt_geometric = 0.01;
    cfg.observable_times = geometric_times(1e-3, T, 8);
    PdeRun run = evolve(kern, g, cfg, [](double r) { return std::exp(-r * r / 4.0); }, T);
    double integral = 0.0;
    for (size_t i = 0; i + 1 < run.times.size(); ++i)
      integral += 0.5 * (run.seminorm_minus[i] + run.seminorm_minus[i + 1]) *
                  (run.times[i + 1] - run.times[i]);
    integrals.push_back(integral);
    double f00 = run.energy.front();
    CHECK(integral <= 5.0 * (1.0 + T) * f00);  // uniform constant across kappa
  }
  // the bound is one-sided: viscosity only smooths the cusp, so the largest
  // integral must sit at the vanishing-viscosity end and stay continuous there
  double mx = *std::max_element(integrals.begin(), integrals.end());
  CHECK(mx == integrals.front());            // kappa = 0 extremizes
  CHECK(integrals[0] <= 1.5 * integrals[1]);  // no blow-up as kappa -> 0
}
