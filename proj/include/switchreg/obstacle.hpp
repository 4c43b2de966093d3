#pragma once

#include "switchreg/grid.hpp"

namespace switchreg {

/// Iteration controls shared by the scalar elliptic solvers.
struct EllipticConfig {
  double tol = 1e-10;   // relative residual threshold
  int max_iter = 0;     // 0 = 200 * max(nx, ny)
  double omega = 1.8;   // SOR relaxation, in (0, 2)
  double comp_tol_rel = 1e-6;  // complementarity threshold, relative to data size

  void validate() const;
  int sweeps_for(const GridSpec& g) const;
};

struct EllipticResult {
  ScalarField u;
  int sweeps = 0;
  double residual = 0.0;  // final max-norm of the converged check
};

/// Solves -lap u = rhs on the interior with u = g on the boundary by SOR,
/// lexicographic sweeps. Stops when the interior residual max-norm drops to
/// tol*(1 + |rhs|_inf). Throws SolverError on non-convergence.
/// `init` optionally seeds the interior iterate (defaults to a blend of the
/// boundary data).
EllipticResult solve_poisson(const ScalarField& rhs, const ScalarField& g,
                             const EllipticConfig& cfg, const ScalarField* init = nullptr);

/// Projected SOR for the double-obstacle problem: find lower <= U <= upper
/// with -lap U = forcing where neither obstacle is active, -lap U - forcing
/// >= 0 on {U = lower} and <= 0 on {U = upper}; U = g on the boundary.
/// Convergence is declared on the complementarity residual (threshold
/// comp_tol_rel * (1 + data max-norms)), never on update size. Obstacle
/// bounds hold exactly after every sweep. Throws SolverError for infeasible
/// obstacles (lower > upper, or boundary data outside the obstacles) and on
/// non-convergence.
EllipticResult solve_double_obstacle(const ScalarField& forcing, const ScalarField& lower,
                                     const ScalarField& upper, const ScalarField& g,
                                     const EllipticConfig& cfg,
                                     const ScalarField* init = nullptr);

}  // namespace switchreg
