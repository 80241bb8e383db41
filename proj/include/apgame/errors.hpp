#pragma once

// Exception hierarchy shared by all apgame modules.  Every error carries a
// human-readable message; the CLI maps the families onto exit codes
// (configuration problems -> 2, numeric/solver failures -> 3).

#include <stdexcept>
#include <string>

namespace apgame {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- configuration / input validation -------------------------------------

struct ConfigError : Error {
  using Error::Error;
};

// Malformed config text (unbalanced brackets, bad literal, ...).
struct ParseError : ConfigError {
  ParseError(const std::string& msg, int line, int column)
      : ConfigError(msg + " at line " + std::to_string(line) + ", column " +
                    std::to_string(column)),
        line(line),
        column(column) {}
  int line;
  int column;
};

// Well-formed config that violates a semantic rule (unknown key, bad range).
struct ValidationError : ConfigError {
  using ConfigError::ConfigError;
};

struct IoError : Error {
  using Error::Error;
};

// Generic precondition violation on a library call.
struct InvalidArgument : Error {
  using Error::Error;
};

struct DimensionMismatch : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

// --- market model ----------------------------------------------------------

struct NonPositiveGain : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct BadDiagonal : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct BadPriceOrder : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

// --- solvers / numerics ----------------------------------------------------

struct NumericError : Error {
  using Error::Error;
};

// Problem size exceeds the exhaustive-enumeration cap.
struct TooLarge : NumericError {
  using NumericError::NumericError;
};

// Lemke pivoting ended on a secondary ray (no solution certificate).
struct RayTermination : NumericError {
  using NumericError::NumericError;
};

struct MaxPivots : NumericError {
  using NumericError::NumericError;
};

// Internal consistency check failed (a solution does not satisfy its own
// defining conditions within tolerance).
struct SolveFailure : NumericError {
  using NumericError::NumericError;
};

// A closed form was requested outside the hypothesis under which it holds
// (wrong AP count, interference too strong).
struct HypothesisViolated : Error {
  using Error::Error;
};

// Duopoly outcome carries zero welfare/profit, so efficiency ratios diverge.
struct DegenerateDuopoly : NumericError {
  using NumericError::NumericError;
};

// An efficiency measure fell below its proven lower bound.
struct BoundViolated : NumericError {
  using NumericError::NumericError;
};

}  // namespace apgame
