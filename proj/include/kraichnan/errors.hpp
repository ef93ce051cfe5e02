// SPDX-License-Identifier: Apache-2.0
#ifndef KRAICHNAN_ERRORS_HPP
#define KRAICHNAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kraichnan {

// Bad arguments or model parameters outside their domain.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Quadrature non-convergence, solver divergence, NaN propagation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Regression / fitting failures (bad window, nonpositive data).
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// Config file / CLI parsing failures.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kraichnan

#endif
