#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gamma_glm {

/// Invalid caller-supplied data or hyperparameters.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite intermediate value in the likelihood (overflow of exp).
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, std::ptrdiff_t row)
      : std::runtime_error(what), row_(row) {}

  /// Offending data row, or -1 when not attributable to a row.
  std::ptrdiff_t row() const noexcept { return row_; }

private:
  std::ptrdiff_t row_;
};

/// The safeguard line search could not find a decrease.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

} // namespace gamma_glm
