#pragma once

#include <map>
#include <string>
#include <vector>

#include "switchreg/grid.hpp"
#include "switchreg/obstacle.hpp"

namespace switchreg {

/// Problem data for the two-mode system
///   min(-lap u1 + f1, u1 - u2 + psi1) = 0
///   min(-lap u2 + f2, u2 - u1 + psi2) = 0   in the interior, u_i = g_i on
/// the boundary. Fields are sampled once at construction and immutable after.
struct ProblemSpec {
  GridSpec grid;
  ScalarField f1, f2, psi1, psi2, g1, g2;
  // expression text per field name, or "<builtin>" for directly built fields
  std::map<std::string, std::string> sources;

  /// 1 + largest sup-norm among the six data fields; every tolerance in the
  /// solvers is relative to this.
  double scale() const;

  static ProblemSpec from_expressions(const std::string& f1, const std::string& f2,
                                      const std::string& psi1, const std::string& psi2,
                                      const std::string& g1, const std::string& g2,
                                      const GridSpec& grid);
  static ProblemSpec from_fields(ScalarField f1, ScalarField f2, ScalarField psi1,
                                 ScalarField psi2, ScalarField g1, ScalarField g2);
};

struct ValidationReport {
  bool pass = false;
  double threshold = 0.0;  // violations below -threshold fail
  // worst (most negative) values and their node indices
  double min_loop = 0.0;       // min of psi1 + psi2 over all nodes
  int min_loop_node = -1;
  double min_compat1 = 0.0;    // min of g1 - g2 + psi1 over boundary nodes
  int min_compat1_node = -1;
  double min_compat2 = 0.0;    // min of g2 - g1 + psi2 over boundary nodes
  int min_compat2_node = -1;
};

/// Checks the nonnegative-loop condition psi1 + psi2 >= 0 on all nodes and
/// the boundary compatibility g1 - g2 + psi1 >= 0, g2 - g1 + psi2 >= 0,
/// each within -eps_machine * scale.
ValidationReport validate_spec(const ProblemSpec& spec);

/// C^1 penalty: zero for nonnegative arguments, quadratic blend on (-eta, 0),
/// linear slope-one tail below. Negative everywhere on s < 0 with derivative
/// in (0, 1].
struct PenaltyFunction {
  double eta = 1.0;

  double beta(double s) const;
  double beta_prime(double s) const;
  double beta_eps(double eps, double s) const { return beta(s / eps); }
  double beta_eps_prime(double eps, double s) const { return beta_prime(s / eps) / eps; }
};

/// Largest constraint violation the penalized system can leave at unit eps:
/// solutions satisfy min theta >= -bound(B) * eps where B bounds the penalty
/// term |beta_eps(theta)| <= B at the solution. Equals max(sqrt(2*eta*B),
/// B + eta/2), the inverse of -beta at -B.
double penalty_feasibility_bound(const PenaltyFunction& pf, double B);

struct SolutionPair {
  ScalarField u1, u2;
  std::string method;  // "penalized" | "minimal" | "closed-form" | "nonminimal"
  std::vector<double> eps_schedule;  // penalized path only
  int iterations = 0;                // Newton steps or PSOR sweeps, total
  double final_residual = 0.0;
};

/// Solves the penalized coupled system
///   -lap u1 + f1 + beta_eps(u1 - u2 + psi1) = 0,
///   -lap u2 + f2 + beta_eps(u2 - u1 + psi2) = 0
/// by damped Newton (step halving until the residual norm decreases), inner
/// linear solves by block point-SOR. Stops when the joint residual max-norm
/// is at most cfg.tol * scale. `warm` seeds the iterate. Throws SolverError
/// on non-convergence or a stalled line search (the latter typically means
/// eps is too small for the grid; use continuation_solve instead).
SolutionPair solve_penalized(const ProblemSpec& spec, double eps, const EllipticConfig& cfg,
                             const PenaltyFunction& pf = {},
                             const SolutionPair* warm = nullptr);

/// Runs solve_penalized over a strictly decreasing positive schedule,
/// warm-starting each stage from the last. Solver errors are rethrown with
/// the failing eps attached.
SolutionPair continuation_solve(const ProblemSpec& spec, const std::vector<double>& schedule,
                                const EllipticConfig& cfg, const PenaltyFunction& pf = {});

/// Minimal solution via the scalar reduction: U solves the double-obstacle
/// problem -psi1 <= U <= psi2, -lap U = f2 - f1 where free, U = g1 - g2 on
/// the boundary; then m = -lap U + f1 - f2 splits into m+ and m-, u1 solves
/// -lap u1 + f1 = m+, and u2 = u1 - U. The returned pair additionally
/// satisfies min(-lap u1 + f1, -lap u2 + f2) ~ 0, which singles out the
/// minimal solution among all solutions of the system.
SolutionPair solve_minimal(const ProblemSpec& spec, const EllipticConfig& cfg);

struct ResidualReport {
  // interior fields, masked on the boundary
  ScalarField min1;    // min(-lap u1 + f1, theta1)
  ScalarField min2;    // min(-lap u2 + f2, theta2)
  ScalarField min3;    // min(-lap u1 + f1, -lap u2 + f2)
  ScalarField theta1;  // u1 - u2 + psi1 (all nodes)
  ScalarField theta2;  // u2 - u1 + psi2
  ScalarField op1;     // -lap u1 + f1
  ScalarField op2;     // -lap u2 + f2
  double max_min1 = 0.0, max_min2 = 0.0, max_min3 = 0.0;  // interior max-norms
  double min_theta1 = 0.0, min_theta2 = 0.0;              // most negative values
  double tol_sys = 0.0;     // 50 h^2 scale
  bool system_ok = false;   // max_min1, max_min2 <= tol_sys
  bool minimal_ok = false;  // max_min3 <= tol_sys as well
  // |lap u_i| bound implied by the system: max dh-Laplacian of psi + 3 max f
  double lap_bound_lhs = 0.0, lap_bound_rhs = 0.0;
  bool lap_bound_ok = false;
};

/// Evaluates all discrete residuals of `pair` against `spec`. Throws
/// GridError when the grids differ.
ResidualReport residual_report(const ProblemSpec& spec, const SolutionPair& pair);

enum class RegionLabel : std::uint8_t {
  Unlabeled = 0,
  Omega1,      // mode-1 running region: -lap u1 + f1 > tau
  Omega2,      // mode-2 running region
  Omega12,     // both operators small, both switching margins slack
  L0,          // deep zero-loop nodes (all 8 neighbors also zero-loop)
  LBoundary,   // zero-loop nodes adjacent to positive loop cost
};

struct SetPartition {
  GridSpec grid;
  double tau = 0.0;
  std::vector<RegionLabel> label;   // per node, row-major
  std::vector<int> meeting_points;  // nodes near Omega1, Omega2 and LBoundary at once
  std::map<std::string, int> counts;
};

/// Labels every node by the region structure of the solved pair. tau <= 0
/// selects the default threshold 10 h^2 scale. Precedence when rules overlap:
/// L0, then LBoundary, then Omega1/Omega2 (larger operator wins, ties to
/// Omega1), then Omega12. Meeting points are nodes within Chebyshev distance
/// 2 of all three of {Omega1, Omega2, LBoundary}.
SetPartition partition_sets(const ProblemSpec& spec, const SolutionPair& pair, double tau = 0.0);

struct NonminimalResult {
  ProblemSpec spec;  // f1 = -M, f2 = M, psi1 = psi, psi2 = -psi, g2 = g1 + psi
  SolutionPair pair;
};

/// Builds a solution that is deliberately not minimal: u1 solves
/// -lap u1 = M + q with boundary g1, and u2 = u1 + psi. The pair solves the
/// two-mode system for the spec above (contact everywhere in mode 1), but
/// min(-lap u1 + f1, -lap u2 + f2) = q, so any q > 0 witnesses
/// non-minimality. Requires 2M > max |lap_h psi| and q >= 0.
NonminimalResult construct_nonminimal(const Expression& psi, double M, const Expression& q,
                                      const Expression& g1, const GridSpec& grid,
                                      const EllipticConfig& cfg);

/// Writes `x,y,u1,u2,theta1,theta2,lapu1,lapu2` rows (17 significant digits);
/// boundary rows print nan in the Laplacian columns.
void write_solution_csv(const ProblemSpec& spec, const SolutionPair& pair, std::ostream& os);
void write_solution_csv(const ProblemSpec& spec, const SolutionPair& pair,
                        const std::string& path);

}  // namespace switchreg
