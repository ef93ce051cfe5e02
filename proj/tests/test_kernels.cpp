// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "kraichnan/errors.hpp"
#include "kraichnan/kernels.hpp"
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
}  // namespace

TEST_CASE("regime classification: spec points") {
  // threshold 1 - 2/(4*0.81) = 0.38271... > 0.2
  CHECK(classify_regime(0.9, 0.2, 2) == Regime::coalescing);
  // eta = 1 exceeds both thresholds for any alpha
  for (double a : {0.1, 0.5, 0.9}) CHECK(classify_regime(a, 1.0, 3) == Regime::diffusive_no_hitting);
  // 0.0741 < 0.15 < 0.2222
  CHECK(classify_regime(0.9, 0.15, 3) == Regime::diffusive_with_hitting);
}

TEST_CASE("regime classification: exact tie lands on boundary_case") {
  // d = 2: the hitting threshold is 1/2 - 0 = 1/2 exactly, for every alpha
  for (double a : {0.3, 0.5, 0.75, 0.9})
    CHECK(classify_regime(a, 0.5, 2) == Regime::boundary_case);
  // one ulp away resolves to a side
  CHECK(classify_regime(0.75, std::nextafter(0.5, 1.0), 2) == Regime::diffusive_no_hitting);
  CHECK(classify_regime(0.75, std::nextafter(0.5, 0.0), 2) == Regime::diffusive_with_hitting);
}

TEST_CASE("regime classification agrees with plain arithmetic away from thresholds") {
  std::uint64_t state = 12345;
  auto rnd = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (state >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 2000; ++i) {
    double a = 0.01 + 0.98 * rnd();
    double e = rnd();
    int d = 2 + static_cast<int>(rnd() * 3);
    double t1 = 1.0 - d / (4.0 * a * a);
    double t2 = 0.5 - (d - 2) / (4.0 * a);
    if (std::fabs(e - t1) < 1e-9 || std::fabs(e - t2) < 1e-9) continue;
    Regime want = e < t1 ? Regime::coalescing
                         : (e > t2 ? Regime::diffusive_no_hitting : Regime::diffusive_with_hitting);
    CHECK(classify_regime(a, e, d) == want);
  }
}

TEST_CASE("derived constants: closed forms at spec points") {
  // d=3, alpha=0.5, eta=1: beta = (2+1)/(2*1) = 1.5, delta_star = min{0.5, 3}
  DerivedConstants k = derived_constants(self_similar(3, 0.5, 1.0));
  CHECK(k.beta == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(k.delta_star == doctest::Approx(0.5).epsilon(1e-12));
  // d=2, alpha=0.5, eta=1, c=1: K_Ric = 0.5 * (1*1*(0+2))^2 = 2
  k = derived_constants(self_similar(2, 0.5, 1.0, 1.0));
  CHECK(k.beta == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(k.k_ric == doctest::Approx(2.0).epsilon(1e-12));
  // c_xi at delta = 0.1: 1/(2 + 1 - 1 - 0.1)
  CHECK(k.c_xi(0.1) == doctest::Approx(1.0 / 1.9).epsilon(1e-12));
  CHECK_THROWS_AS(k.c_xi(0.9), ValidationError);  // delta >= delta_star
}

TEST_CASE("delta_star > 0 iff diffusive, on a parameter sweep") {
  for (int d : {2, 3}) {
    for (int ia = 1; ia <= 19; ++ia) {
      for (int ie = 0; ie <= 20; ++ie) {
        double a = ia * 0.05, e = ie * 0.05;
        ModelParams p = self_similar(d, a, e);
        DerivedConstants k = derived_constants(p);
        Regime r = classify_regime(a, e, d);
        if (r == Regime::boundary_case) continue;
        bool diffusive =
            r == Regime::diffusive_with_hitting || r == Regime::diffusive_no_hitting;
        CHECK((k.delta_star > 0.0) == diffusive);
      }
    }
  }
}

TEST_CASE("delta_star vanishes at the diffusive boundary") {
  // eta placed at the double closest to 1 - d/(4 a^2)
  double a = 0.8;
  int d = 2;
  double eta = 1.0 - d / (4.0 * a * a);
  DerivedConstants k = derived_constants(self_similar(d, a, eta));
  CHECK(std::fabs(k.delta_star) < 1e-12);
}

TEST_CASE("dissipation constant: closed form vs quadrature route, eta = 1") {
  for (int d : {2, 3}) {
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      ModelParams p;
      p.d = d;
      p.alpha = a;
      p.eta = 1.0;
      p.m = 1.0;
      DerivedConstants k = derived_constants(p);
      double closed = dissipation_constant_closed_form(a, d, p.resolved_trace_c0());
      CHECK(closed == doctest::Approx(k.c_tilde).epsilon(1e-6));
    }
  }
}

TEST_CASE("dissipation constant: endpoint limits") {
  for (int d : {2, 3}) {
    double tr = 2.0 * d;
    CHECK(dissipation_constant_closed_form(1e-6, d, tr) ==
          doctest::Approx(dissipation_constant_limit_alpha0(d, tr)).epsilon(1e-4));
    CHECK(dissipation_constant_closed_form(1.0 - 1e-6, d, tr) ==
          doctest::Approx(dissipation_constant_limit_alpha1(d, tr)).epsilon(1e-4));
    // finite across alpha = 1/2
    double mid = dissipation_constant_closed_form(0.5, d, tr);
    CHECK(std::isfinite(mid));
    CHECK(mid > 0.0);
  }
  CHECK_THROWS_AS(dissipation_constant_closed_form(1.2, 2, 4.0), ValidationError);
}

TEST_CASE("structure coefficients: self-similar exact power laws") {
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  CHECK(kern.bL(0.0) == 0.0);
  CHECK(kern.bN(0.0) == 0.0);
  CHECK(kern.bL(0.25) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(kern.bN(0.25) == doctest::Approx(0.5).epsilon(1e-14));  // beta = 2
  CHECK(kern.bL_prime(0.25) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(kern.bL(-1.0), ValidationError);
}

TEST_CASE("structure coefficients: full kernel against the independent oracle") {
  ModelParams p;
  p.d = 2;
  p.alpha = 0.5;
  p.eta = 1.0;
  p.m = 1.0;
  IsotropicKernel kern(p);  // tabulated; queries go through interpolation
  for (double r : {0.1, 0.031, 1.7}) {
    double obL, obN;
    oracle::structure_pair(2, 0.5, 1.0, 1.0, p.resolved_trace_c0(), r, &obL, &obN, 1e-10);
    CHECK(kern.bL(r) == doctest::Approx(obL).epsilon(1e-6));
    CHECK(kern.bN(r) == doctest::Approx(obN).epsilon(1e-6));
  }
}

TEST_CASE("structure coefficients: full kernel small-r asymptotics") {
  // b_L(r)/r^{2a} -> c and b_N/b_L -> beta within 1% at r = 1e-3/m
  for (auto [d, a, e] : {std::tuple<int, double, double>{2, 0.3, 1.0},
                         {2, 0.55, 0.7},
                         {3, 0.45, 0.9},
                         {3, 0.25, 0.5}}) {
    ModelParams p;
    p.d = d;
    p.alpha = a;
    p.eta = e;
    p.m = 2.0;
    KernelOptions ko;
    ko.tabulate = false;
    IsotropicKernel kern(p, ko);
    double r = 1e-3 / p.m;
    const auto& k = kern.constants();
    double bl = kern.bL_exact(r), bn = kern.bN_exact(r);
    CHECK(bl / std::pow(r, 2 * a) == doctest::Approx(k.c).epsilon(0.01));
    CHECK(bn / bl == doctest::Approx(k.beta).epsilon(0.01));
  }
}

TEST_CASE("trace normalization: d * B_N(0) matches trace_c0") {
  // b_L saturates: B_L(0) - B_L(r) -> B_L(0) = trace/d as r -> infinity
  ModelParams p;
  p.d = 2;
  p.alpha = 0.4;
  p.eta = 0.6;
  p.m = 1.0;
  KernelOptions ko;
  ko.tabulate = false;
  IsotropicKernel kern(p, ko);
  double sat = 0.5 * (kern.bL_exact(4e3) + kern.bN_exact(4e3));
  CHECK(sat == doctest::Approx(p.resolved_trace_c0() / p.d).epsilon(2e-3));
  CHECK(kern.constants().bN0 == doctest::Approx(p.resolved_trace_c0() / p.d).epsilon(1e-14));
}

TEST_CASE("q_matrix: projector structure and PSD") {
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  // z = e1, c=1, beta=2 -> diag(1, 2)
  auto q = kern.q_matrix({1.0, 0.0});
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q[3] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(0.0));
  // z = 0 -> zero matrix
  auto q0 = kern.q_matrix({0.0, 0.0});
  for (double v : q0) CHECK(v == 0.0);
  // eigenvalues are {b_L (along z), b_N (orthogonal)} at machine precision
  std::uint64_t state = 777;
  auto rnd = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (state >> 11) * 0x1.0p-53 - 0.5;
  };
  for (int trial = 0; trial < 50; ++trial) {
    double z0 = rnd(), z1 = rnd();
    double rr = std::hypot(z0, z1);
    if (rr < 1e-3) continue;
    auto Q = kern.q_matrix({z0, z1});
    double bl = kern.bL(rr), bn = kern.bN(rr);
    // Q zhat = b_L zhat
    double v0 = Q[0] * z0 + Q[1] * z1, v1 = Q[2] * z0 + Q[3] * z1;
    CHECK(v0 == doctest::Approx(bl * z0).epsilon(1e-12));
    CHECK(v1 == doctest::Approx(bl * z1).epsilon(1e-12));
    // Q w = b_N w for w orthogonal to z
    double w0 = -z1, w1 = z0;
    double u0 = Q[0] * w0 + Q[1] * w1, u1 = Q[2] * w0 + Q[3] * w1;
    CHECK(u0 == doctest::Approx(bn * w0).epsilon(1e-12));
    CHECK(u1 == doctest::Approx(bn * w1).epsilon(1e-12));
    CHECK(bl >= 0.0);
    CHECK(bn >= 0.0);
  }
}

TEST_CASE("ellipticity floor") {
  ModelParams p = self_similar(2, 0.5, 1.0, 1.0);
  IsotropicKernel kern(p);
  // monotone power law: floor attained at r0 and equals min(c, beta c) r0^{2a}
  CHECK(kern.ellipticity_floor(1.0, 2.0, 33) == doctest::Approx(1.0).epsilon(1e-12));
  // degenerate request r0 = R: single-radius evaluation
  CHECK(kern.ellipticity_floor(2.0, 2.0, 5) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(kern.ellipticity_floor(0.0, 1.0, 3), ValidationError);

  ModelParams pf;
  pf.d = 2;
  pf.alpha = 0.6;
  pf.eta = 1.0;
  KernelOptions ko;
  ko.tabulate = false;
  IsotropicKernel full(pf, ko);
  CHECK(full.ellipticity_floor(0.5, 3.0, 7) > 0.0);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.alpha = 0.5;
  p.eta = -0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.eta = 1.0;
  p.d = 1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
