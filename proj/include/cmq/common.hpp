#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace cmq {

using Cplx = std::complex<double>;

inline constexpr const char* kVersion = "0.1.0";

/// Comparison tolerances. Checks always report raw residuals; the tolerances
/// only drive boolean classifications and error guards.
struct Tolerances {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double geometry = 1e-8;  // classification threshold, relative to tensor magnitude
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation requested more x-derivatives than the configured jet order
/// supports (every differentiation consumes one order of the budget).
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Singular chart data at the base point (sqrt/recip domain violation,
/// degenerate metric, vanishing contact volume).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mismatched dimensions, cutoffs or other structural incompatibilities.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, int col, const std::string& msg)
      : Error("line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col),
        detail_(msg) {}
  int line() const { return line_; }
  int col() const { return col_; }
  /// Message without the position prefix, for rethrowing at shifted positions.
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  int col_;
  std::string detail_;
};

}  // namespace cmq
