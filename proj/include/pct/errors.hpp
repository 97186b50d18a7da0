#ifndef PCT_ERRORS_HPP
#define PCT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pct {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid construction or argument: cyclic graphs, schema violations,
// unknown names, malformed parameter sets.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (CSV or JSON). line/column are 1-based; 0 = unknown.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0,
                      std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A conditioning stratum required by an estimator is empty.
class DegenerateStratumError : public Error {
 public:
  using Error::Error;
};

// Risk ratio requested but the reference arm has event probability zero.
class ZeroReferenceRiskError : public Error {
 public:
  using Error::Error;
};

// Odds ratio requested but an arm has event probability 0 or 1.
class UndefinedOddsError : public Error {
 public:
  using Error::Error;
};

// Hazard ratio requested but an arm contributes no events.
class NoEventsError : public Error {
 public:
  using Error::Error;
};

// The supplied adjustment set does not satisfy the backdoor criterion.
class NotAdmissibleError : public Error {
 public:
  using Error::Error;
};

// An adjustment stratum has nonzero marginal probability but no
// observations at the intervened levels.
class PositivityViolationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pct

#endif  // PCT_ERRORS_HPP
