#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "switchreg/closedform.hpp"
#include "switchreg/switching.hpp"

using namespace switchreg;

namespace {

GridSpec square(int n) { return GridSpec{-1.0, 1.0, -1.0, 1.0, n, n}; }

ProblemSpec zero_spec(const GridSpec& g) {
  return ProblemSpec::from_expressions("0", "0", "0", "0", "0", "0", g);
}

ProblemSpec slack_spec(const GridSpec& g) {
  return ProblemSpec::from_expressions("0", "0", "1", "1", "0", "0", g);
}

// smooth data with a pinched loop (psi2 = -psi1), so both constraints matter
ProblemSpec pinched_spec(const GridSpec& g) {
  return ProblemSpec::from_expressions("-1", "1", "0.05*sin(pi*x)*sin(pi*y)",
                                       "-(0.05*sin(pi*x)*sin(pi*y))", "0", "0", g);
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double worst = 0.0;
  for (int k = 0; k < a.grid.count(); ++k)
    worst = std::max(worst, std::fabs(a.values[k] - b.values[k]));
  return worst;
}

}  // namespace

TEST_CASE("spec construction and validation") {
  GridSpec g = square(17);
  ProblemSpec spec = slack_spec(g);
  CHECK(spec.scale() == 2.0);  // 1 + max field norm
  CHECK(spec.sources.at("psi1") == "1");
  CHECK(validate_spec(spec).pass);

  ProblemSpec bad = ProblemSpec::from_expressions("0", "0", "-1", "0", "0", "0", g);
  ValidationReport rep = validate_spec(bad);
  CHECK(!rep.pass);
  CHECK(rep.min_loop == -1.0);
  CHECK(rep.min_loop_node >= 0);

  // boundary compatibility: g1 - g2 + psi1 = -2 + 1 < 0 on the boundary
  ProblemSpec incompat = ProblemSpec::from_expressions("0", "0", "1", "1", "0", "2", g);
  CHECK(!validate_spec(incompat).pass);
}

TEST_CASE("one-dimensional cost data validates on a thin grid") {
  GridSpec g{-0.96875, 0.96875, -0.96875, 0.96875, 63, 3};
  CHECK(g.hx() == 0.03125);
  const char* psi1 = "(1-abs(x))*cos(pi/(1-abs(x)))";
  const char* psi2 = "(1-abs(x))*(1-cos(pi/(1-abs(x))))";
  // boundary rows sweep every x, so g2 = psi1 keeps both compatibility gaps
  // nonnegative: g1-g2+psi1 = 0 and g2-g1+psi2 = loop sum
  ProblemSpec spec = ProblemSpec::from_expressions("0", "0", psi1, psi2, "0", psi1, g);
  ValidationReport rep = validate_spec(spec);
  CHECK(rep.pass);
  CHECK(rep.min_loop >= 0.0);
  CHECK(spec.psi1.at(31, 1) == -1.0);  // node 31 sits at x = 0
}

TEST_CASE("penalty function branches") {
  PenaltyFunction pf;  // eta = 1
  CHECK(pf.beta(1.0) == 0.0);
  CHECK(pf.beta(0.0) == 0.0);
  CHECK(pf.beta(-0.5) == -0.125);  // -eta/8 at -eta/2
  CHECK(pf.beta(-2.0) == -1.5);    // -3 eta/2 at -2 eta

  PenaltyFunction wide;
  wide.eta = 2.0;
  CHECK(wide.beta(-1.0) == -0.25);
  CHECK(wide.beta(-4.0) == -3.0);

  oracles::Rng rng;
  for (int t = 0; t < 200; ++t) {
    double s = rng.uniform(-5.0, 5.0);
    if (s >= 0.0) {
      CHECK(pf.beta(s) == 0.0);
    } else {
      CHECK(pf.beta(s) < 0.0);
      CHECK(pf.beta_prime(s) > 0.0);
      CHECK(pf.beta_prime(s) <= 1.0);
    }
    double eps = rng.uniform(0.01, 2.0);
    CHECK(pf.beta_eps(eps, s) == pf.beta(s / eps));
  }
}

TEST_CASE("penalty feasibility bound inverts the tail") {
  PenaltyFunction pf;
  CHECK(penalty_feasibility_bound(pf, 0.0) == 0.5);
  CHECK(penalty_feasibility_bound(pf, 2.0) == 2.5);
  CHECK_THROWS_AS(penalty_feasibility_bound(pf, -1.0), SolverError);
  oracles::Rng rng;
  for (int t = 0; t < 100; ++t) {
    double b = rng.uniform(0.0, 10.0);
    double s = penalty_feasibility_bound(pf, b);
    // the bound point already violates by at least b
    CHECK(pf.beta(-s) <= -b + 1e-15);
  }
}

TEST_CASE("penalized solve on slack data returns zero") {
  GridSpec g = square(17);
  EllipticConfig cfg;
  SolutionPair pair = solve_penalized(slack_spec(g), 0.5, cfg);
  CHECK(max_norm(pair.u1) <= 1e-12);
  CHECK(max_norm(pair.u2) <= 1e-12);
  CHECK(pair.method == "penalized");
}

TEST_CASE("penalized solve rejects invalid input") {
  GridSpec g = square(9);
  EllipticConfig cfg;
  ProblemSpec bad = ProblemSpec::from_expressions("0", "0", "-1", "0", "0", "0", g);
  CHECK_THROWS_AS(solve_penalized(bad, 0.5, cfg), SolverError);
  CHECK_THROWS_AS(solve_penalized(slack_spec(g), -1.0, cfg), SolverError);
}

TEST_CASE("interior operator bounds hold for converged penalized runs") {
  GridSpec g = square(33);
  EllipticConfig cfg;
  ProblemSpec spec = pinched_spec(g);
  const double scale = spec.scale();
  const double h2 = g.hx() * g.hx();
  const double delta = 10.0 * h2 * scale;
  const double fmax = 1.0;
  ScalarField lap_psi = laplacian(spec.psi1);
  const double bound_hi = max_norm(lap_psi) + 3.0 * fmax + delta;

  for (double eps : {1.0, 0.1}) {
    SolutionPair pair = solve_penalized(spec, eps, cfg);
    for (const ScalarField* u : {&pair.u1, &pair.u2}) {
      ScalarField lap = laplacian(*u);
      for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
          double op = -lap.at(i, j);
          CHECK(op >= -fmax - delta);
          CHECK(op <= bound_hi);
        }
    }
  }
}

TEST_CASE("continuation matches single stage and contracts") {
  GridSpec g = square(17);
  EllipticConfig cfg;
  ProblemSpec spec = pinched_spec(g);

  SolutionPair single = solve_penalized(spec, 1.0, cfg);
  SolutionPair chain = continuation_solve(spec, {1.0}, cfg);
  CHECK(max_diff(single.u1, chain.u1) == 0.0);
  CHECK(max_diff(single.u2, chain.u2) == 0.0);

  SolutionPair s1 = continuation_solve(spec, {1.0}, cfg);
  SolutionPair s2 = continuation_solve(spec, {1.0, 0.1}, cfg);
  SolutionPair s3 = continuation_solve(spec, {1.0, 0.1, 0.01}, cfg);
  double d12 = std::max(max_diff(s1.u1, s2.u1), max_diff(s1.u2, s2.u2));
  double d23 = std::max(max_diff(s2.u1, s3.u1), max_diff(s2.u2, s3.u2));
  CHECK(d23 < d12);

  CHECK_THROWS_AS(continuation_solve(spec, {}, cfg), SolverError);
  CHECK_THROWS_AS(continuation_solve(spec, {0.1, 1.0}, cfg), SolverError);
}

TEST_CASE("minimal solve satisfies all three equations") {
  GridSpec g = square(33);
  EllipticConfig cfg;

  SolutionPair zero = solve_minimal(slack_spec(g), cfg);
  CHECK(max_norm(zero.u1) <= 1e-12);
  CHECK(max_norm(zero.u2) <= 1e-12);

  ProblemSpec spec = pinched_spec(g);
  SolutionPair pair = solve_minimal(spec, cfg);
  ResidualReport rep = residual_report(spec, pair);
  CHECK(rep.system_ok);
  CHECK(rep.minimal_ok);
  CHECK(rep.lap_bound_ok);
  CHECK(rep.min_theta1 >= -rep.tol_sys);
  CHECK(rep.min_theta2 >= -rep.tol_sys);

  // boundary values are adopted exactly
  for (int i = 0; i < g.nx; ++i) {
    CHECK(pair.u1.at(i, 0) == spec.g1.at(i, 0));
    CHECK(pair.u2.at(i, 0) == spec.g2.at(i, 0));
  }
}

TEST_CASE("minimal solve tracks the closed forms") {
  GridSpec g = square(65);
  EllipticConfig cfg;
  ProblemSpec spec = counterexample_spec(g);
  SolutionPair pair = solve_minimal(spec, cfg);
  double err = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      err = std::max(err, std::fabs(pair.u1.at(i, j) - ce_u1(g.x(i), g.y(j))));
      err = std::max(err, std::fabs(pair.u2.at(i, j) - ce_u2(g.x(i), g.y(j))));
    }
  CHECK(err <= 0.02);

  ResidualReport rep = residual_report(spec, pair);
  CHECK(rep.system_ok);
  CHECK(rep.minimal_ok);
}

TEST_CASE("penalized continuation and minimal pipeline agree") {
  GridSpec g = square(33);
  EllipticConfig cfg;
  ProblemSpec spec = pinched_spec(g);
  const double eps_final = 0.0009765625;  // 2^-10
  std::vector<double> schedule;
  for (double e = 0.5; e >= eps_final; e /= 2.0) schedule.push_back(e);
  SolutionPair pen = continuation_solve(spec, schedule, cfg);
  SolutionPair min = solve_minimal(spec, cfg);
  const double h2 = g.hx() * g.hx();
  const double tol = 5.0 * (eps_final + h2) * spec.scale();
  CHECK(max_diff(pen.u1, min.u1) <= tol);
  CHECK(max_diff(pen.u2, min.u2) <= tol);
}

TEST_CASE("residual report on trivial data and mismatched grids") {
  GridSpec g = square(9);
  ProblemSpec spec = zero_spec(g);
  SolutionPair pair;
  pair.u1 = ScalarField(g);
  pair.u2 = ScalarField(g);
  pair.method = "minimal";
  ResidualReport rep = residual_report(spec, pair);
  CHECK(rep.max_min1 == 0.0);
  CHECK(rep.max_min2 == 0.0);
  CHECK(rep.max_min3 == 0.0);
  CHECK(rep.system_ok);

  SolutionPair off;
  off.u1 = ScalarField(square(11));
  off.u2 = ScalarField(square(11));
  CHECK_THROWS_AS(residual_report(spec, off), GridError);
}

TEST_CASE("set partition labels slack and quadrant structure") {
  GridSpec g = square(33);
  EllipticConfig cfg;
  ProblemSpec slack = slack_spec(g);
  SolutionPair zero = solve_minimal(slack, cfg);
  SetPartition part = partition_sets(slack, zero);
  CHECK(part.counts.at("l0") == 0);
  CHECK(part.counts.at("l_boundary") == 0);
  CHECK(part.counts.at("omega12") == (g.nx - 2) * (g.ny - 2));
  CHECK(part.meeting_points.empty());
  CHECK(part.tau > 0.0);

  // closed-form pair: quadrant structure plus a thin loop set at the origin
  GridSpec gc = square(65);
  ProblemSpec spec = counterexample_spec(gc);
  SolutionPair oracle;
  oracle.u1 = sample([](double x, double y) { return ce_u1(x, y); }, gc);
  oracle.u2 = sample([](double x, double y) { return ce_u2(x, y); }, gc);
  oracle.method = "closed-form";
  const double h2 = gc.hx() * gc.hx();
  SetPartition cpart = partition_sets(spec, oracle, 0.5 * h2);
  CHECK(cpart.counts.at("l0") == 0);
  CHECK(cpart.counts.at("l_boundary") >= 1);
  CHECK(!cpart.meeting_points.empty());

  // interior of Q1 runs mode 1, interior of Q3 runs mode 2
  const double margin = 2.5 * gc.hx();
  for (int j = 1; j < gc.ny - 1; ++j)
    for (int i = 1; i < gc.nx - 1; ++i) {
      double x = gc.x(i), y = gc.y(j);
      if (std::fabs(x) < margin || std::fabs(y) < margin) continue;
      if (x * x + y * y < 0.3 * 0.3) continue;
      if (x > 0 && y > 0) CHECK(cpart.label[gc.idx(i, j)] == RegionLabel::Omega1);
      if (x < 0 && y < 0) CHECK(cpart.label[gc.idx(i, j)] == RegionLabel::Omega2);
    }
}

TEST_CASE("nonminimal construction") {
  GridSpec g = square(33);
  EllipticConfig cfg;
  Expression zero = parse_expression("0");
  Expression one = parse_expression("1");

  NonminimalResult flat = construct_nonminimal(zero, 1.0, zero, zero, g, cfg);
  CHECK(max_diff(flat.pair.u1, flat.pair.u2) == 0.0);  // psi = 0 makes them equal
  ResidualReport flat_rep = residual_report(flat.spec, flat.pair);
  CHECK(flat_rep.system_ok);
  CHECK(flat_rep.max_min3 <= flat_rep.tol_sys);  // q = 0 stays minimal

  Expression tilt = parse_expression("x");
  NonminimalResult tilted = construct_nonminimal(tilt, 1.0, zero, zero, g, cfg);
  double theta_worst = 0.0;
  for (int k = 0; k < g.count(); ++k)
    theta_worst = std::max(theta_worst,
                           std::fabs(tilted.pair.u1.values[k] - tilted.pair.u2.values[k] +
                                     tilted.spec.psi1.values[k]));
  CHECK(theta_worst <= 1e-13);

  NonminimalResult bumped = construct_nonminimal(tilt, 1.0, one, zero, g, cfg);
  CHECK(max_diff(bumped.pair.u1, tilted.pair.u1) > 0.1);  // q shifts the pair
  ResidualReport bump_rep = residual_report(bumped.spec, bumped.pair);
  CHECK(bump_rep.system_ok);       // still solves the two-mode system
  CHECK(bump_rep.max_min3 >= 0.5);  // but loudly violates the third equation

  Expression steep = parse_expression("10*(x^2+y^2)");
  CHECK_THROWS_AS(construct_nonminimal(steep, 1.0, zero, zero, g, cfg), SolverError);
  Expression neg = parse_expression("0-1");
  CHECK_THROWS_AS(construct_nonminimal(tilt, 1.0, neg, zero, g, cfg), SolverError);
}

TEST_CASE("minimality against constructed competitors") {
  GridSpec g = square(33);
  EllipticConfig cfg;
  Expression psi = parse_expression("x");
  Expression g1 = parse_expression("0");
  NonminimalResult v0 = construct_nonminimal(psi, 1.0, parse_expression("0"), g1, g, cfg);
  NonminimalResult v1 = construct_nonminimal(psi, 1.0, parse_expression("1"), g1, g, cfg);
  SolutionPair minimal = solve_minimal(v0.spec, cfg);
  const double tol = 1e-6 * v0.spec.scale();
  for (const NonminimalResult* v : {&v0, &v1}) {
    for (int k = 0; k < g.count(); ++k) {
      CHECK(minimal.u1.values[k] <= v->pair.u1.values[k] + tol);
      CHECK(minimal.u2.values[k] <= v->pair.u2.values[k] + tol);
    }
  }
}

TEST_CASE("solution csv layout") {
  GridSpec g = square(5);
  ProblemSpec spec = slack_spec(g);
  SolutionPair pair = solve_minimal(spec, EllipticConfig{});
  std::ostringstream os;
  write_solution_csv(spec, pair, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,y,u1,u2,theta1,theta2,lapu1,lapu2");
  int rows = 0;
  bool saw_nan = false;
  while (std::getline(is, line)) {
    ++rows;
    if (line.find("nan") != std::string::npos) saw_nan = true;
  }
  CHECK(rows == g.count());
  CHECK(saw_nan);  // boundary laplacian columns
}
