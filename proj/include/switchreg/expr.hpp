#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "switchreg/errors.hpp"

namespace switchreg {

/// Immutable arithmetic expression over the variables x, y and the derived
/// radius r = sqrt(x^2 + y^2), with the constant pi and the functions
/// sin, cos, ln, exp, abs, sqrt, min, max, atan2.
///
/// Parsed once into a flat node arena; evaluation is pure and thread-safe.
/// Precedence (loosest to tightest): +,- then *,/ then unary minus then ^;
/// ^ is right-associative and binds tighter than unary minus, so -x^2 is
/// -(x^2) and 2^-3 is 2^(-3).
class Expression {
public:
  enum class Kind : std::uint8_t { Number, Variable, Unary, Binary, Call };
  enum class Var : std::uint8_t { X, Y, R };
  enum class Func : std::uint8_t { Sin, Cos, Ln, Exp, Abs, Sqrt, Min, Max, Atan2 };

  struct Node {
    Kind kind;
    char op = 0;          // Binary: one of + - * / ^ ; Unary: '-'
    Var var = Var::X;     // Variable
    Func func = Func::Sin;  // Call
    double value = 0.0;   // Number
    int a = -1;           // first child index
    int b = -1;           // second child index
    std::size_t pos = 0;  // source offset, for evaluation error messages
  };

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }
  const std::string& source() const { return source_; }

  friend Expression parse_expression(const std::string& text);

private:
  std::vector<Node> nodes_;
  int root_ = -1;
  std::string source_;
};

/// Parses `text` into an Expression. Throws ParseError with the 0-based
/// offset of the offending token (or end of input).
Expression parse_expression(const std::string& text);

/// Evaluates at (x, y) in IEEE double arithmetic. Throws EvalError on
/// ln of a non-positive value, sqrt of a negative value, division by zero,
/// and ^ with a negative base and non-integer exponent.
double evaluate(const Expression& e, double x, double y);

/// Canonical text form; parsing it back yields a structurally identical AST.
std::string pretty_print(const Expression& e);

/// Structural equality of two parsed expressions (shape, operators and
/// bitwise-equal literals; source text is ignored).
bool same_ast(const Expression& a, const Expression& b);

}  // namespace switchreg
