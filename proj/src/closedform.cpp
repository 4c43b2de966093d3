#include "switchreg/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace switchreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// r^2 * (theta*cos(2 theta) + ln(r)*sin(2 theta)): harmonic off the positive
// x-axis, C^1 there after the branch blending below, not C^{1,1} at 0.
double spiral_term(double r, double theta) {
  return r * r * (theta * std::cos(2.0 * theta) + std::log(r) * std::sin(2.0 * theta));
}

}  // namespace

PolarPoint to_polar(double x, double y) {
  PolarPoint p;
  p.r = std::hypot(x, y);
  double t = std::atan2(y, x);
  p.theta = t <= 0.0 ? t + 2.0 * kPi : t;
  return p;
}

double ce_phi(double x, double y) { return 0.25 * (x * x + y * y); }

double ce_w(double x, double y) {
  PolarPoint p = to_polar(x, y);
  if (p.r == 0.0) return 0.0;
  const double rr = x * x + y * y;  // exact where hypot(x,y)^2 need not be
  if (p.theta <= 0.5 * kPi) return -0.25 * rr;
  if (p.theta <= kPi) return 0.25 * (x * x - y * y);
  if (p.theta <= 1.5 * kPi) return 0.25 * rr;
  return 0.25 * (y * y - x * x);
}

double ce_u1(const PolarPoint& p) {
  if (p.r < 0.0) throw EvalError("polar radius must be nonnegative");
  if (p.r == 0.0) return 0.0;
  const double r2 = p.r * p.r;
  const double c2 = std::cos(2.0 * p.theta);
  const double s = spiral_term(p.r, p.theta) / (4.0 * kPi);
  if (p.theta <= 0.5 * kPi) return -0.25 * r2 - 0.125 * r2 * c2 - s;
  return 0.125 * r2 * c2 - s;
}

double ce_u1(double x, double y) { return ce_u1(to_polar(x, y)); }

double ce_u2(const PolarPoint& p) {
  if (p.r < 0.0) throw EvalError("polar radius must be nonnegative");
  if (p.r == 0.0) return 0.0;
  const double r2 = p.r * p.r;
  const double c2 = std::cos(2.0 * p.theta);
  const double s = spiral_term(p.r, p.theta) / (4.0 * kPi);
  if (p.theta <= 0.5 * kPi) return -0.125 * r2 * c2 - s;
  if (p.theta <= kPi) return -0.125 * r2 * c2 - s;
  if (p.theta <= 1.5 * kPi) return -0.25 * r2 + 0.125 * r2 * c2 - s;
  return 0.375 * r2 * c2 - s;
}

double ce_u2(double x, double y) { return ce_u2(to_polar(x, y)); }

CounterexampleReport verify_counterexample(const GridSpec& g, double rho_excl, double tol) {
  g.validate();
  const double h = std::max(g.hx(), g.hy());
  if (g.xmin > -1.0 || g.xmax < 1.0 || g.ymin > -1.0 || g.ymax < 1.0)
    throw GridError("counterexample check needs the grid to cover [-1,1]^2");
  if (rho_excl < 4.0 * h) throw GridError("exclusion radius must be at least 4h");
  if (!(tol > 0.0)) throw GridError("tolerance must be positive");

  ScalarField u1 = sample([](double x, double y) { return ce_u1(x, y); }, g);
  ScalarField u2 = sample([](double x, double y) { return ce_u2(x, y); }, g);
  ScalarField phi = sample(&ce_phi, g);
  ScalarField lap1 = laplacian(u1);
  ScalarField lap2 = laplacian(u2);

  CounterexampleReport rep;
  rep.nx = g.nx;
  rep.ny = g.ny;
  rep.rho_excl = rho_excl;
  rep.tol = tol;

  const double axis_margin = 2.0 * h * (1.0 - 1e-12);
  const double rho2 = rho_excl * rho_excl;
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      double x = g.x(i), y = g.y(j);
      if (x * x + y * y <= rho2) continue;
      if (std::fabs(x) < axis_margin || std::fabs(y) < axis_margin) continue;
      ++rep.nodes_checked;
      int k = g.idx(i, j);
      double neglap1 = -lap1.values[k];
      double neglap2 = -lap2.values[k];
      double margin1 = u1.values[k] - u2.values[k] + phi.values[k];
      double margin2 = u2.values[k] - u1.values[k] + phi.values[k];
      rep.max_system_residual_1 =
          std::max(rep.max_system_residual_1, std::fabs(std::min(neglap1, margin1)));
      rep.max_system_residual_2 =
          std::max(rep.max_system_residual_2, std::fabs(std::min(neglap2, margin2)));
      if (neglap1 >= 0.5)
        rep.max_contact_residual_1 = std::max(rep.max_contact_residual_1, std::fabs(margin1));
      if (neglap2 >= 0.5)
        rep.max_contact_residual_2 = std::max(rep.max_contact_residual_2, std::fabs(margin2));
    }
  }

  rep.pass = rep.nodes_checked > 0 && rep.max_system_residual_1 <= tol &&
             rep.max_system_residual_2 <= tol && rep.max_contact_residual_1 <= tol &&
             rep.max_contact_residual_2 <= tol;
  {
    std::ostringstream note;
    note << "checked " << rep.nodes_checked << " nodes; excluded |x|,|y| < " << axis_margin
         << " and the ball of radius " << rho_excl << " around the origin";
    rep.notes.push_back(note.str());
  }
  rep.notes.push_back("loop cost 2*phi vanishes only at the excluded origin");
  return rep;
}

ProblemSpec counterexample_spec(const GridSpec& g) {
  g.validate();
  ScalarField zero = sample([](double, double) { return 0.0; }, g);
  ScalarField phi = sample(&ce_phi, g);
  ScalarField g1 = sample([](double x, double y) { return ce_u1(x, y); }, g);
  ScalarField g2 = sample([](double x, double y) { return ce_u2(x, y); }, g);
  ProblemSpec spec = ProblemSpec::from_fields(zero, zero, phi, phi, g1, g2);
  spec.sources["f1"] = "0";
  spec.sources["f2"] = "0";
  spec.sources["psi1"] = "0.25*(x*x + y*y)";
  spec.sources["psi2"] = "0.25*(x*x + y*y)";
  return spec;
}

CostPair example1_costs(double x) {
  const double ax = std::fabs(x);
  if (ax >= 1.0) throw EvalError("example1 costs are defined for |x| < 1");
  const double d = 1.0 - ax;
  const double c = std::cos(kPi / d);
  CostPair out;
  // One factor is kept in [1/2, 2] of d so the complementary subtraction is
  // exact and psi1 + psi2 == d bitwise.
  if (c >= 0.5) {
    out.psi1 = d * c;
    out.psi2 = d - out.psi1;
  } else {
    out.psi2 = d * (1.0 - c);
    out.psi1 = d - out.psi2;
  }
  return out;
}

double loop_gain(int n_terms) {
  if (n_terms < 1) throw EvalError("loop gain needs at least one term");
  double s = 0.0;
  for (int n = 0; n < n_terms; ++n) s += 1.0 / (2.0 * n + 1.0);
  return s;
}

}  // namespace switchreg
