#pragma once

#include <string>
#include <vector>

#include "switchreg/grid.hpp"
#include "switchreg/switching.hpp"

namespace switchreg {

/// Closed-form reference fields for a two-mode system whose solution pair has
/// a log-singular Hessian at the origin, plus the one-dimensional cost pair
/// with unbounded switching gain. These are the ground-truth oracles used by
/// the tests and the `counterexample` CLI command.

struct PolarPoint {
  double r = 0.0;      // >= 0
  double theta = 0.0;  // in (0, 2pi]
};

/// Maps Cartesian coordinates to PolarPoint with theta in (0, 2pi]; the
/// positive x-axis gets theta = 2pi. Origin maps to r = 0, theta = 2pi.
PolarPoint to_polar(double x, double y);

/// Switching cost phi(x,y) = (x^2 + y^2)/4. Both modes share it, so the loop
/// cost 2*phi vanishes exactly at the origin and nowhere else.
double ce_phi(double x, double y);

/// C^{1,1} quadrant-piecewise field: the difference ce_u1 - ce_u2. Branches
/// follow theta in (0,pi/2], (pi/2,pi], (pi,3pi/2], (3pi/2,2pi]; values on the
/// axes are the continuous extension.
double ce_w(double x, double y);

/// First component. Continuous, C^1 away from the origin, with second radial
/// derivative growing like |ln r|; minus its Laplacian is the indicator of the
/// open first quadrant. r = 0 returns the continuous limit 0; callers probing
/// the singularity must exclude a neighborhood of the origin themselves.
double ce_u1(const PolarPoint& p);
double ce_u1(double x, double y);

/// Second component, equal to ce_u1 - ce_w pointwise and to ce_u1(-x,-y)
/// exactly (the pair is symmetric under rotation by pi).
double ce_u2(const PolarPoint& p);
double ce_u2(double x, double y);

struct CounterexampleReport {
  int nx = 0, ny = 0;
  double rho_excl = 0.0;
  double tol = 0.0;
  int nodes_checked = 0;
  // max |min(-lap u^i, switch margin^i)| over checked nodes
  double max_system_residual_1 = 0.0;
  double max_system_residual_2 = 0.0;
  // max |u1 - u2 + phi| where -lap u1 ~ 1, and symmetrically for u2
  double max_contact_residual_1 = 0.0;
  double max_contact_residual_2 = 0.0;
  bool pass = false;
  std::vector<std::string> notes;
};

/// Samples the closed forms on `g` and checks the discrete system residuals
/// at interior nodes excluding a ball of radius rho_excl around the origin
/// and a 2-node margin around both coordinate axes (the Hessian jumps there).
/// Throws GridError unless the grid covers [-1,1]^2 and rho_excl >= 4h.
CounterexampleReport verify_counterexample(const GridSpec& g, double rho_excl, double tol);

/// ProblemSpec the closed-form pair solves: f1 = f2 = 0, psi1 = psi2 = ce_phi,
/// boundary data sampled from ce_u1 / ce_u2. The pair is the minimal solution
/// of this spec, so solve_minimal on it converges to the closed forms.
ProblemSpec counterexample_spec(const GridSpec& g);

struct CostPair {
  double psi1 = 0.0;
  double psi2 = 0.0;
};

/// One-dimensional cost pair psi1 = (1-|x|)*cos(pi/(1-|x|)),
/// psi2 = (1-|x|)*(1-cos(pi/(1-|x|))) for |x| < 1. The split is arranged so
/// that psi1 + psi2 == 1-|x| holds bitwise. Throws EvalError at |x| >= 1.
CostPair example1_costs(double x);

/// Partial switching gain sum_{n=0}^{N-1} 1/(2n+1); strictly increasing and
/// divergent in N. Throws EvalError for N < 1.
double loop_gain(int n_terms);

}  // namespace switchreg
