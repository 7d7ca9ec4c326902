#pragma once

#include <stdexcept>
#include <string>

namespace nsasym {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on an argument (bad grid, t <= 0, range errors).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The requested operation is ill-posed for the given data: a singular
/// multiplier applied to a field with nonzero mean, or a field whose mass
/// reaches the box boundary.
class IllPosed : public Error {
public:
  using Error::Error;
};

/// A quadrature, tail extrapolation or fit did not meet its convergence test.
class ConvergenceFailure : public Error {
public:
  using Error::Error;
};

/// The integrator left the perturbative regime.
class BlowUp : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Configuration error, carrying the 1-based line of the offending entry
/// (0 when the problem is not tied to a line, e.g. a missing key).
class ConfigError : public Error {
public:
  ConfigError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

} // namespace nsasym
