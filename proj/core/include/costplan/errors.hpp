#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace costplan {

// Root of every error the library throws. Callers that only need to tell
// "the model said no" from "the input was malformed" catch Error vs ConfigError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (x < -1/e for W0, alpha <= 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Root finder called with a bracket whose endpoints share a sign.
class BracketError : public Error {
 public:
  using Error::Error;
};

// Iterative method or quadrature failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

enum class Infeasibility {
  BelowFloor,    // target below the smallest attainable value
  AboveCeiling,  // target above the largest attainable value
  Unattainable,  // no parameter pair meets all targets at once
  Billing,       // budget leads to a non-positive device count
};

// A target cannot be met. Carries the attainable range so callers can report
// the nearest reachable value instead of a bare flag.
class InfeasibleError : public Error {
 public:
  InfeasibleError(Infeasibility kind, const std::string& what,
                  double attainable_lo = std::numeric_limits<double>::quiet_NaN(),
                  double attainable_hi = std::numeric_limits<double>::quiet_NaN())
      : Error(what), kind_(kind), lo_(attainable_lo), hi_(attainable_hi) {}

  Infeasibility kind() const noexcept { return kind_; }
  double attainable_lo() const noexcept { return lo_; }
  double attainable_hi() const noexcept { return hi_; }

 private:
  Infeasibility kind_;
  double lo_;
  double hi_;
};

// Malformed input data; row is 1-based within the source file.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Input could not be read or was empty.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace costplan
