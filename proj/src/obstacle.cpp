#include "switchreg/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace switchreg {

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.grid == b.grid)) throw GridError(std::string("grid mismatch: ") + what);
}

double boundary_max(const ScalarField& g) {
  const GridSpec& gr = g.grid;
  double m = 0.0;
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      if (gr.on_boundary(i, j)) m = std::max(m, std::fabs(g.at(i, j)));
  return m;
}

double interior_max(const ScalarField& f) {
  const GridSpec& gr = f.grid;
  double m = 0.0;
  for (int j = 1; j < gr.ny - 1; ++j)
    for (int i = 1; i < gr.nx - 1; ++i) m = std::max(m, std::fabs(f.at(i, j)));
  return m;
}

[[noreturn]] void non_convergence(const char* solver, int sweeps, double residual,
                                  double thresh) {
  std::ostringstream msg;
  msg << solver << " did not converge in " << sweeps << " sweeps; residual " << residual
      << " vs threshold " << thresh;
  throw SolverError(msg.str());
}

}  // namespace

void EllipticConfig::validate() const {
  if (!(tol > 0.0)) throw SolverError("elliptic tol must be positive");
  if (!(omega > 0.0 && omega < 2.0)) throw SolverError("SOR omega must lie in (0,2)");
  if (max_iter < 0) throw SolverError("max_iter must be nonnegative");
  if (!(comp_tol_rel > 0.0)) throw SolverError("comp_tol_rel must be positive");
}

int EllipticConfig::sweeps_for(const GridSpec& g) const {
  return max_iter > 0 ? max_iter : 200 * std::max(g.nx, g.ny);
}

EllipticResult solve_poisson(const ScalarField& rhs, const ScalarField& g,
                             const EllipticConfig& cfg, const ScalarField* init) {
  cfg.validate();
  rhs.grid.validate();
  require_same_grid(rhs, g, "rhs vs boundary data");
  if (init) require_same_grid(rhs, *init, "rhs vs initial guess");

  const GridSpec& gr = rhs.grid;
  ScalarField u = init ? *init : blend_boundary(g);
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      if (gr.on_boundary(i, j)) u.at(i, j) = g.at(i, j);

  const double ihx2 = 1.0 / (gr.hx() * gr.hx());
  const double ihy2 = 1.0 / (gr.hy() * gr.hy());
  const double diag = 2.0 * ihx2 + 2.0 * ihy2;
  const double thresh = cfg.tol * (1.0 + interior_max(rhs));
  const int max_sweeps = cfg.sweeps_for(gr);

  double residual = 0.0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int j = 1; j < gr.ny - 1; ++j) {
      for (int i = 1; i < gr.nx - 1; ++i) {
        double star = (rhs.at(i, j) + (u.at(i - 1, j) + u.at(i + 1, j)) * ihx2 +
                       (u.at(i, j - 1) + u.at(i, j + 1)) * ihy2) /
                      diag;
        u.at(i, j) += cfg.omega * (star - u.at(i, j));
      }
    }
    if (sweep % 10 != 0 && sweep != max_sweeps) continue;
    residual = 0.0;
    for (int j = 1; j < gr.ny - 1; ++j) {
      for (int i = 1; i < gr.nx - 1; ++i) {
        double neglap = diag * u.at(i, j) - (u.at(i - 1, j) + u.at(i + 1, j)) * ihx2 -
                        (u.at(i, j - 1) + u.at(i, j + 1)) * ihy2;
        residual = std::max(residual, std::fabs(neglap - rhs.at(i, j)));
      }
    }
    if (residual <= thresh) return {std::move(u), sweep, residual};
  }
  non_convergence("poisson solver", max_sweeps, residual, thresh);
}

EllipticResult solve_double_obstacle(const ScalarField& forcing, const ScalarField& lower,
                                     const ScalarField& upper, const ScalarField& g,
                                     const EllipticConfig& cfg, const ScalarField* init) {
  cfg.validate();
  forcing.grid.validate();
  require_same_grid(forcing, lower, "forcing vs lower obstacle");
  require_same_grid(forcing, upper, "forcing vs upper obstacle");
  require_same_grid(forcing, g, "forcing vs boundary data");
  if (init) require_same_grid(forcing, *init, "forcing vs initial guess");

  const GridSpec& gr = forcing.grid;
  for (int k = 0; k < gr.count(); ++k)
    if (lower.values[k] > upper.values[k])
      throw SolverError("infeasible obstacles: lower exceeds upper");
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      if (gr.on_boundary(i, j) &&
          (g.at(i, j) < lower.at(i, j) || g.at(i, j) > upper.at(i, j)))
        throw SolverError("infeasible obstacles: boundary data leaves [lower, upper]");

  ScalarField u = init ? *init : blend_boundary(g);
  for (int k = 0; k < gr.count(); ++k)
    u.values[k] = std::clamp(u.values[k], lower.values[k], upper.values[k]);
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      if (gr.on_boundary(i, j)) u.at(i, j) = g.at(i, j);

  const double ihx2 = 1.0 / (gr.hx() * gr.hx());
  const double ihy2 = 1.0 / (gr.hy() * gr.hy());
  const double diag = 2.0 * ihx2 + 2.0 * ihy2;
  const double tolc =
      cfg.comp_tol_rel *
      (1.0 + std::max({interior_max(forcing), max_norm(lower), max_norm(upper), boundary_max(g)}));
  const int max_sweeps = cfg.sweeps_for(gr);

  double residual = 0.0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int j = 1; j < gr.ny - 1; ++j) {
      for (int i = 1; i < gr.nx - 1; ++i) {
        double star = (forcing.at(i, j) + (u.at(i - 1, j) + u.at(i + 1, j)) * ihx2 +
                       (u.at(i, j - 1) + u.at(i, j + 1)) * ihy2) /
                      diag;
        double next = u.at(i, j) + cfg.omega * (star - u.at(i, j));
        u.at(i, j) = std::clamp(next, lower.at(i, j), upper.at(i, j));
      }
    }
    if (sweep % 10 != 0 && sweep != max_sweeps) continue;
    residual = 0.0;
    for (int j = 1; j < gr.ny - 1; ++j) {
      for (int i = 1; i < gr.nx - 1; ++i) {
        double neglap = diag * u.at(i, j) - (u.at(i - 1, j) + u.at(i + 1, j)) * ihx2 -
                        (u.at(i, j - 1) + u.at(i, j + 1)) * ihy2;
        double res = neglap - forcing.at(i, j);
        double dev;
        if (u.at(i, j) == lower.at(i, j) && u.at(i, j) == upper.at(i, j))
          dev = 0.0;  // pinched: equation replaced by the forced value
        else if (u.at(i, j) == lower.at(i, j))
          dev = std::max(0.0, -res);
        else if (u.at(i, j) == upper.at(i, j))
          dev = std::max(0.0, res);
        else
          dev = std::fabs(res);
        residual = std::max(residual, dev);
      }
    }
    if (residual <= tolc) return {std::move(u), sweep, residual};
  }
  non_convergence("double-obstacle solver", max_sweeps, residual, tolc);
}

}  // namespace switchreg
