#ifndef LETHARGY_ERROR_HPP
#define LETHARGY_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lethargy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

/// Bad inputs: violated preconditions, malformed chains, invalid targets.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// An iterative solver (LP, Newton, bracket expansion) did not reach its goal.
class SolverFailure : public Error {
public:
  using Error::Error;
};

/// An intermediate-value search was given a bracket that does not straddle
/// the target value.
class BracketError : public SolverFailure {
public:
  BracketError(const std::string &what, double g_lo, double g_hi)
      : SolverFailure(what), value_lo(g_lo), value_hi(g_hi) {}
  double value_lo;
  double value_hi;
};

} // namespace lethargy

#endif // LETHARGY_ERROR_HPP
