#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "switchreg/expr.hpp"

using namespace switchreg;

TEST_CASE("literals and basic arithmetic") {
  CHECK(evaluate(parse_expression("1"), 0.0, 0.0) == 1.0);
  CHECK(evaluate(parse_expression("0.25*(x^2+y^2)"), 1.0, 1.0) == 0.5);
  CHECK(evaluate(parse_expression("x^2+y^2"), 0.0, 0.0) == 0.0);
  CHECK(evaluate(parse_expression("r"), 3.0, 4.0) == 5.0);
  CHECK(evaluate(parse_expression("atan2(y, x)"), 1.0, 1.0) == doctest::Approx(std::atan(1.0)));
  CHECK(evaluate(parse_expression("(1-abs(x))*cos(pi/(1-abs(x)))"), 0.0, 0.0) == -1.0);
}

TEST_CASE("precedence and associativity") {
  // ^ above unary minus above * / above + -
  CHECK(evaluate(parse_expression("2+3*4"), 0.0, 0.0) == 14.0);
  CHECK(evaluate(parse_expression("2^3^2"), 0.0, 0.0) == 512.0);
  CHECK(evaluate(parse_expression("-x^2"), 3.0, 0.0) == -9.0);
  CHECK(evaluate(parse_expression("2^-3"), 0.0, 0.0) == 0.125);
  CHECK(evaluate(parse_expression("10-4-3"), 0.0, 0.0) == 3.0);
  CHECK(evaluate(parse_expression("24/4/2"), 0.0, 0.0) == 3.0);

  oracles::Rng rng;
  for (int t = 0; t < 50; ++t) {
    double a = rng.uniform(-5, 5), b = rng.uniform(-5, 5), c = rng.uniform(-5, 5);
    std::string text = std::to_string(a) + "+" + std::to_string(b) + "*" + std::to_string(c);
    double expect = std::stod(std::to_string(a)) +
                    std::stod(std::to_string(b)) * std::stod(std::to_string(c));
    CHECK(evaluate(parse_expression(text), 0.0, 0.0) == expect);
  }
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_expression("min(x,"), ParseError);
  try {
    parse_expression("min(x,");
  } catch (const ParseError& e) {
    CHECK(e.position() == 6);
  }
  CHECK_THROWS_AS(parse_expression("(x+1"), ParseError);
  CHECK_THROWS_AS(parse_expression("z+1"), ParseError);
  CHECK_THROWS_AS(parse_expression("sin(x, y)"), ParseError);
  CHECK_THROWS_AS(parse_expression("min(x)"), ParseError);
  CHECK_THROWS_AS(parse_expression(""), ParseError);
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(evaluate(parse_expression("ln(x)"), -1.0, 0.0), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expression("1/x"), 0.0, 0.0), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expression("sqrt(0-1)"), 0.0, 0.0), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expression("(0-2)^0.5"), 0.0, 0.0), EvalError);
  CHECK(evaluate(parse_expression("(0-2)^2"), 0.0, 0.0) == 4.0);
}

TEST_CASE("pretty-print round-trips to the same AST") {
  const std::vector<std::string> cases = {
      "1",
      "0.25*(x^2+y^2)",
      "(1-abs(x))*cos(pi/(1-abs(x)))",
      "min(x, max(y, 0.5))",
      "-x^2 + 2^-3",
      "atan2(y, x) / (1 + r)",
      "exp(-r^2) * sin(pi*x) * cos(pi*y)",
      "ln(2 + abs(x)) - sqrt(1 + y^2)",
  };
  for (const std::string& text : cases) {
    Expression e = parse_expression(text);
    Expression round = parse_expression(pretty_print(e));
    CHECK(same_ast(e, round));
  }
}

TEST_CASE("evaluation is bit-stable") {
  Expression e = parse_expression("exp(-r^2)*sin(pi*x)+atan2(y,x)/(2-cos(y))");
  oracles::Rng rng;
  for (int t = 0; t < 20; ++t) {
    double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
    double v1 = evaluate(e, x, y);
    double v2 = evaluate(e, x, y);
    CHECK(v1 == v2);
  }
}
