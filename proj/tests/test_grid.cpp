#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "switchreg/grid.hpp"

using namespace switchreg;

namespace {

GridSpec square(int n) { return GridSpec{-1.0, 1.0, -1.0, 1.0, n, n}; }

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(square(3).validate());
  CHECK_THROWS_AS((GridSpec{0.0, 0.0, -1.0, 1.0, 5, 5}.validate()), GridError);
  CHECK_THROWS_AS((GridSpec{-1.0, 1.0, -1.0, 1.0, 2, 5}.validate()), GridError);
  GridSpec g = square(5);
  CHECK(g.hx() == 0.5);
  CHECK(g.x(1) == -0.5);
  CHECK(g.idx(2, 3) == 3 * 5 + 2);
  CHECK(g.on_boundary(0, 2));
  CHECK(!g.on_boundary(1, 2));
}

TEST_CASE("sampling expressions and functions") {
  GridSpec g = square(5);
  ScalarField two = sample(parse_expression("2"), g);
  for (double v : two.values) CHECK(v == 2.0);

  ScalarField phi = sample(parse_expression("0.25*(x^2+y^2)"), g);
  CHECK(phi.at(1, 1) == 0.25 * (0.5 * 0.5 + 0.5 * 0.5));

  // grid node (1,1) of the 3x3 unit grid sits at the origin
  CHECK_THROWS_AS(sample(parse_expression("ln(r)"), square(3)), EvalError);
}

TEST_CASE("laplacian stencil exactness") {
  GridSpec g = square(9);
  ScalarField quad = sample(parse_expression("x^2+y^2"), g);
  ScalarField lap = laplacian(quad);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) CHECK(lap.masked(i, j));
      else CHECK(lap.at(i, j) == doctest::Approx(4.0).epsilon(1e-13));
    }

  ScalarField lin = sample(parse_expression("x"), g);
  ScalarField lap_lin = laplacian(lin);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) CHECK(lap_lin.at(i, j) == 0.0);
}

TEST_CASE("laplacian truncation error on x^4") {
  GridSpec g{-1.0, 1.0, -1.0, 1.0, 257, 257};  // h = 2^-7
  ScalarField u = sample(parse_expression("x^4"), g);
  ScalarField lap = laplacian(u);
  double worst = 0.0;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      double x = g.x(i);
      worst = std::max(worst, std::fabs(lap.at(i, j) - 12.0 * x * x));
    }
  CHECK(worst <= 2.0 * g.hx() * g.hx());
}

TEST_CASE("laplacian linearity and hessian trace identity") {
  GridSpec g = square(17);
  ScalarField u = sample(parse_expression("exp(x)*sin(pi*y)"), g);
  ScalarField v = sample(parse_expression("x^3 - 2*y^2 + x*y"), g);
  const double a = 1.7, b = -0.6;

  ScalarField combo(g);
  for (int k = 0; k < g.count(); ++k) combo.values[k] = a * u.values[k] + b * v.values[k];
  ScalarField lap_combo = laplacian(combo);
  ScalarField lap_u = laplacian(u), lap_v = laplacian(v);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      CHECK(lap_combo.at(i, j) ==
            doctest::Approx(a * lap_u.at(i, j) + b * lap_v.at(i, j)).epsilon(1e-12));

  HessianFields h = hessian(u);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      if (!h.xx.masked(i, j)) CHECK(h.xx.at(i, j) + h.yy.at(i, j) == lap_u.at(i, j));
}

TEST_CASE("hessian exact on low-degree monomials") {
  GridSpec g = square(9);
  HessianFields hxy = hessian(sample(parse_expression("x*y"), g));
  HessianFields hx2 = hessian(sample(parse_expression("x^2"), g));
  HessianFields hx3 = hessian(sample(parse_expression("x^3"), g));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (hxy.xy.masked(i, j)) continue;
      CHECK(hxy.xy.at(i, j) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(hxy.xx.at(i, j) == 0.0);
      CHECK(hxy.yy.at(i, j) == 0.0);
      CHECK(hx2.xx.at(i, j) == doctest::Approx(2.0).epsilon(1e-13));
      CHECK(hx3.xx.at(i, j) == doctest::Approx(6.0 * g.x(i)).epsilon(1e-12));
    }
}

TEST_CASE("ball averages against disk integrals") {
  GridSpec g{-2.0, 2.0, -2.0, 2.0, 513, 513};
  ScalarField c = sample(parse_expression("3.5"), g);
  CHECK(ball_average(c, 0.0, 0.0, 1.0) == doctest::Approx(3.5).epsilon(1e-14));

  ScalarField x = sample(parse_expression("x"), g);
  CHECK(std::fabs(ball_average(x, 0.0, 0.0, 1.0)) <= 10.0 * g.hx());

  ScalarField x2 = sample(parse_expression("x^2"), g);
  CHECK(ball_average(x2, 0.0, 0.0, 1.0) == doctest::Approx(0.25).epsilon(0.01));

  ScalarField one = sample(parse_expression("1"), g);
  CHECK(ball_l2(one, 0.0, 0.0, 1.0) == doctest::Approx(std::sqrt(M_PI)).epsilon(0.01));
  CHECK(ball_l2(x, 0.0, 0.0, 1.0) == doctest::Approx(std::sqrt(M_PI / 4.0)).epsilon(0.01));

  ScalarField zero = sample(parse_expression("0"), g);
  CHECK(ball_l2(zero, 0.0, 0.0, 1.0) == 0.0);

  CHECK_THROWS_AS(ball_average(c, 10.0, 10.0, 0.5), GridError);
}

TEST_CASE("laplacian converges at second order") {
  const char* text = "sin(pi*x)*exp(y)";
  double prev = -1.0;
  for (int n : {33, 65, 129}) {
    GridSpec g = square(n);
    ScalarField u = sample(parse_expression(text), g);
    ScalarField lap = laplacian(u);
    double worst = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        double x = g.x(i), y = g.y(j);
        double exact = (1.0 - M_PI * M_PI) * std::sin(M_PI * x) * std::exp(y);
        worst = std::max(worst, std::fabs(lap.at(i, j) - exact));
      }
    if (prev > 0.0) CHECK(prev / worst >= 3.5);
    prev = worst;
  }
}

TEST_CASE("blend_boundary matches boundary data exactly") {
  GridSpec g = square(9);
  ScalarField gfield = sample(parse_expression("x^2 - y + 0.3*x*y"), g);
  ScalarField init = blend_boundary(gfield);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.on_boundary(i, j)) CHECK(init.at(i, j) == gfield.at(i, j));
}

TEST_CASE("csv export") {
  GridSpec g{0.0, 1.0, 0.0, 1.0, 3, 3};
  ScalarField u = sample(parse_expression("x + 10*y"), g);
  std::ostringstream os;
  write_csv(u, os);
  std::string text = os.str();
  CHECK(text.substr(0, 10) == "x,y,value\n");
  CHECK(text.find("0.5,0,0.5") != std::string::npos);
  CHECK(text.back() == '\n');

  ScalarField lap = laplacian(u);
  std::ostringstream os2;
  write_csv(lap, os2);
  CHECK(os2.str().find("nan") != std::string::npos);
}
