#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace switchreg {

/// Syntax error while parsing an expression. `position` is the 0-based
/// offset of the offending token (or end of input).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Domain error raised during expression evaluation (log of a non-positive
/// value, division by zero, and so on).
class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Structural misuse of grids or fields (shape mismatch, empty ball,
/// out-of-domain probe).
class GridError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver failure: non-convergence within the iteration budget,
/// infeasible obstacles, stalled Newton damping.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Config file problem. `line` is 1-based; 0 means "not tied to a line"
/// (semantic validation of a parsed value).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

}  // namespace switchreg
