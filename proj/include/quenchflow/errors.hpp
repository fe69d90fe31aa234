#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quenchflow {

// Common base so callers can catch everything from this library at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- expression DSL ----

struct ParseError : Error {
  enum class Kind { UnexpectedToken, UnexpectedEnd, UnknownIdentifier };
  Kind kind;
  std::size_t offset;  // byte offset into the source string

  ParseError(Kind k, std::size_t off, const std::string& msg)
      : Error(msg), kind(k), offset(off) {}
};

struct EvalError : Error {
  enum class Kind { DivisionByZero, NonFiniteResult };
  Kind kind;
  double x;  // evaluation point

  EvalError(Kind k, double at, const std::string& msg)
      : Error(msg), kind(k), x(at) {}
};

// ---- grid / spec ----

struct InvalidResolution : Error {
  using Error::Error;
};

// A ProblemSpec (or other input object) violates one of its invariants.
struct SpecError : Error {
  using Error::Error;
};

// ---- solver ----

struct SingularState : Error {
  using Error::Error;
};

struct LinearSolveFailure : Error {
  using Error::Error;
};

struct NotQuenched : Error {
  using Error::Error;
};

struct DegenerateDimension : Error {
  using Error::Error;
};

// ---- ODE oracle ----

struct NonPositiveY : Error {
  using Error::Error;
};

struct StepUnderflow : Error {
  using Error::Error;
};

// ---- barriers / experiments ----

struct HypothesisViolated : Error {
  using Error::Error;
};

struct InvalidInterval : Error {
  using Error::Error;
};

// ---- persistence ----

struct CorruptRecord : Error {
  std::string path;

  CorruptRecord(std::string file, const std::string& msg)
      : Error(msg), path(std::move(file)) {}
};

// ---- cli / config ----

struct ConfigError : Error {
  enum class Kind { UnknownKey, TypeMismatch, MissingKey };
  Kind kind;
  int line;  // 1-based line number, 0 if not applicable

  ConfigError(Kind k, int ln, const std::string& msg)
      : Error(msg), kind(k), line(ln) {}
};

// ---- mesh export ----

struct SnapshotMissing : Error {
  using Error::Error;
};

struct UnsupportedDimension : Error {
  using Error::Error;
};

}  // namespace quenchflow
