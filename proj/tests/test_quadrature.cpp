// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "kraichnan/errors.hpp"
#include "kraichnan/quadrature.hpp"

using namespace kraichnan;

TEST_CASE("adaptive GK on smooth integrands") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0, M_PI, 1e-12) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -8, 8, 1e-12) ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("adaptive GK resolves a sharp peak") {
  double v = integrate([](double x) { return 1.0 / (1e-6 + x * x); }, -1, 1, 1e-10);
  double exact = 2.0 * std::atan(1.0 / 1e-3) / 1e-3;
  CHECK(v == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("tanh-sinh handles endpoint singularities") {
  // int_0^1 x^{-1/2} dx = 2
  double v = integrate_tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0, 1, 1e-12);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-10));
  // int_0^1 log(x) dx = -1
  v = integrate_tanh_sinh([](double x) { return std::log(x); }, 0, 1, 1e-12);
  CHECK(v == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("gauss-legendre panel is near-exact for one oscillation") {
  double v = gauss_legendre_20([](double x) { return std::cos(x); }, 0, M_PI);
  CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
  v = gauss_legendre_20([](double x) { return std::sin(3 * x) * x; }, 0, 2);
  // exact: int x sin(3x) dx = sin(3x)/9 - x cos(3x)/3
  double exact = std::sin(6.0) / 9.0 - 2.0 * std::cos(6.0) / 3.0;
  CHECK(v == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("non-convergence reports achieved tolerance") {
  // discontinuous integrand at an irrational point with an absurd tolerance
  auto f = [](double x) { return x > M_SQRT1_2 ? 1.0 : 0.0; };
  CHECK_THROWS_AS(integrate(f, 0, 1, 1e-16, 0.0), NumericalError);
}
