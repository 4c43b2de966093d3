#include "switchreg/switching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace switchreg {

namespace {

constexpr int kNewtonMax = 100;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_grid(const ProblemSpec& spec, const SolutionPair& pair) {
  if (!(pair.u1.grid == spec.grid) || !(pair.u2.grid == spec.grid))
    throw GridError("solution pair lives on a different grid than the spec");
}

double tol_sys_for(const ProblemSpec& spec) {
  double h = std::max(spec.grid.hx(), spec.grid.hy());
  return 50.0 * h * h * spec.scale();
}

}  // namespace

double ProblemSpec::scale() const {
  double m = 0.0;
  for (const ScalarField* f : {&f1, &f2, &psi1, &psi2, &g1, &g2})
    m = std::max(m, max_norm(*f));
  return 1.0 + m;
}

ProblemSpec ProblemSpec::from_expressions(const std::string& f1, const std::string& f2,
                                          const std::string& psi1, const std::string& psi2,
                                          const std::string& g1, const std::string& g2,
                                          const GridSpec& grid) {
  grid.validate();
  ProblemSpec s;
  s.grid = grid;
  const std::pair<const char*, const std::string*> items[] = {
      {"f1", &f1}, {"f2", &f2}, {"psi1", &psi1}, {"psi2", &psi2}, {"g1", &g1}, {"g2", &g2}};
  ScalarField* fields[] = {&s.f1, &s.f2, &s.psi1, &s.psi2, &s.g1, &s.g2};
  for (int k = 0; k < 6; ++k) {
    Expression e = parse_expression(*items[k].second);
    *fields[k] = sample(e, grid);
    s.sources[items[k].first] = *items[k].second;
  }
  return s;
}

ProblemSpec ProblemSpec::from_fields(ScalarField f1, ScalarField f2, ScalarField psi1,
                                     ScalarField psi2, ScalarField g1, ScalarField g2) {
  ProblemSpec s;
  s.grid = f1.grid;
  for (const ScalarField* f : {&f2, &psi1, &psi2, &g1, &g2})
    if (!(f->grid == s.grid)) throw GridError("spec fields live on different grids");
  s.f1 = std::move(f1);
  s.f2 = std::move(f2);
  s.psi1 = std::move(psi1);
  s.psi2 = std::move(psi2);
  s.g1 = std::move(g1);
  s.g2 = std::move(g2);
  for (const char* name : {"f1", "f2", "psi1", "psi2", "g1", "g2"})
    s.sources[name] = "<builtin>";
  return s;
}

ValidationReport validate_spec(const ProblemSpec& spec) {
  const GridSpec& g = spec.grid;
  ValidationReport rep;
  rep.threshold = std::numeric_limits<double>::epsilon() * spec.scale();
  rep.min_loop = std::numeric_limits<double>::infinity();
  rep.min_compat1 = std::numeric_limits<double>::infinity();
  rep.min_compat2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.count(); ++k) {
    double loop = spec.psi1.values[k] + spec.psi2.values[k];
    if (loop < rep.min_loop) {
      rep.min_loop = loop;
      rep.min_loop_node = k;
    }
  }
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!g.on_boundary(i, j)) continue;
      int k = g.idx(i, j);
      double c1 = spec.g1.values[k] - spec.g2.values[k] + spec.psi1.values[k];
      double c2 = spec.g2.values[k] - spec.g1.values[k] + spec.psi2.values[k];
      if (c1 < rep.min_compat1) {
        rep.min_compat1 = c1;
        rep.min_compat1_node = k;
      }
      if (c2 < rep.min_compat2) {
        rep.min_compat2 = c2;
        rep.min_compat2_node = k;
      }
    }
  }
  rep.pass = rep.min_loop >= -rep.threshold && rep.min_compat1 >= -rep.threshold &&
             rep.min_compat2 >= -rep.threshold;
  return rep;
}

double PenaltyFunction::beta(double s) const {
  if (s >= 0.0) return 0.0;
  if (s > -eta) return -s * s / (2.0 * eta);
  return s + eta / 2.0;
}

double PenaltyFunction::beta_prime(double s) const {
  if (s >= 0.0) return 0.0;
  if (s > -eta) return -s / eta;
  return 1.0;
}

double penalty_feasibility_bound(const PenaltyFunction& pf, double B) {
  if (B < 0.0) throw SolverError("penalty bound needs B >= 0");
  return std::max(std::sqrt(2.0 * pf.eta * B), B + pf.eta / 2.0);
}

namespace {

// Joint residual of the penalized system on interior nodes; F1/F2 are
// full-size arrays with boundary entries left at zero.
double pen_residual(const ProblemSpec& spec, const PenaltyFunction& pf, double eps,
                    const ScalarField& u1, const ScalarField& u2, std::vector<double>& F1,
                    std::vector<double>& F2) {
  const GridSpec& g = spec.grid;
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  const double diag = 2.0 * ihx2 + 2.0 * ihy2;
  double norm = 0.0;
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      int k = g.idx(i, j);
      double neglap1 = diag * u1.values[k] - (u1.at(i - 1, j) + u1.at(i + 1, j)) * ihx2 -
                       (u1.at(i, j - 1) + u1.at(i, j + 1)) * ihy2;
      double neglap2 = diag * u2.values[k] - (u2.at(i - 1, j) + u2.at(i + 1, j)) * ihx2 -
                       (u2.at(i, j - 1) + u2.at(i, j + 1)) * ihy2;
      double th1 = u1.values[k] - u2.values[k] + spec.psi1.values[k];
      double th2 = u2.values[k] - u1.values[k] + spec.psi2.values[k];
      F1[k] = neglap1 + spec.f1.values[k] + pf.beta_eps(eps, th1);
      F2[k] = neglap2 + spec.f2.values[k] + pf.beta_eps(eps, th2);
      norm = std::max(norm, std::max(std::fabs(F1[k]), std::fabs(F2[k])));
    }
  }
  return norm;
}

// One Newton step: solve the coupled linearized system for (d1, d2) by block
// point-SOR. The 2x2 node block is inverted exactly; its determinant
// a^2 + a(c1+c2) is positive since the penalty slopes c_i are nonnegative.
void newton_direction(const ProblemSpec& spec, const PenaltyFunction& pf, double eps,
                      const ScalarField& u1, const ScalarField& u2,
                      const std::vector<double>& F1, const std::vector<double>& F2,
                      double fnorm, const EllipticConfig& cfg, std::vector<double>& d1,
                      std::vector<double>& d2) {
  const GridSpec& g = spec.grid;
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  const double diag = 2.0 * ihx2 + 2.0 * ihy2;
  const int n = g.count();

  std::vector<double> c1(n, 0.0), c2(n, 0.0);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      int k = g.idx(i, j);
      c1[k] = pf.beta_eps_prime(eps, u1.values[k] - u2.values[k] + spec.psi1.values[k]);
      c2[k] = pf.beta_eps_prime(eps, u2.values[k] - u1.values[k] + spec.psi2.values[k]);
    }
  }
  std::fill(d1.begin(), d1.end(), 0.0);
  std::fill(d2.begin(), d2.end(), 0.0);

  const double inner_tol = 0.05 * fnorm;
  const int max_sweeps = cfg.sweeps_for(g);
  double omega = cfg.omega;
  double prev_res = std::numeric_limits<double>::infinity();
  double res = prev_res;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int j = 1; j < g.ny - 1; ++j) {
      for (int i = 1; i < g.nx - 1; ++i) {
        int k = g.idx(i, j);
        double nb1 = (d1[g.idx(i - 1, j)] + d1[g.idx(i + 1, j)]) * ihx2 +
                     (d1[g.idx(i, j - 1)] + d1[g.idx(i, j + 1)]) * ihy2;
        double nb2 = (d2[g.idx(i - 1, j)] + d2[g.idx(i + 1, j)]) * ihx2 +
                     (d2[g.idx(i, j - 1)] + d2[g.idx(i, j + 1)]) * ihy2;
        double r1 = -F1[k] + nb1;
        double r2 = -F2[k] + nb2;
        double det = diag * diag + diag * (c1[k] + c2[k]);
        double n1 = ((diag + c2[k]) * r1 + c1[k] * r2) / det;
        double n2 = (c2[k] * r1 + (diag + c1[k]) * r2) / det;
        d1[k] += omega * (n1 - d1[k]);
        d2[k] += omega * (n2 - d2[k]);
      }
    }
    if (sweep % 10 != 0 && sweep != max_sweeps) continue;
    res = 0.0;
    for (int j = 1; j < g.ny - 1; ++j) {
      for (int i = 1; i < g.nx - 1; ++i) {
        int k = g.idx(i, j);
        double nb1 = (d1[g.idx(i - 1, j)] + d1[g.idx(i + 1, j)]) * ihx2 +
                     (d1[g.idx(i, j - 1)] + d1[g.idx(i, j + 1)]) * ihy2;
        double nb2 = (d2[g.idx(i - 1, j)] + d2[g.idx(i + 1, j)]) * ihx2 +
                     (d2[g.idx(i, j - 1)] + d2[g.idx(i, j + 1)]) * ihy2;
        double lin1 = (diag + c1[k]) * d1[k] - nb1 - c1[k] * d2[k] + F1[k];
        double lin2 = (diag + c2[k]) * d2[k] - nb2 - c2[k] * d1[k] + F2[k];
        res = std::max(res, std::max(std::fabs(lin1), std::fabs(lin2)));
      }
    }
    if (res <= inner_tol) return;
    // relaxation too aggressive for this coupling: back toward Gauss-Seidel
    if (res > prev_res && omega > 1.0) omega = 1.0 + 0.5 * (omega - 1.0);
    prev_res = res;
  }
  if (res > 0.5 * fnorm)
    throw SolverError("penalized solver: inner linear solve stalled");
}

}  // namespace

SolutionPair solve_penalized(const ProblemSpec& spec, double eps, const EllipticConfig& cfg,
                             const PenaltyFunction& pf, const SolutionPair* warm) {
  cfg.validate();
  if (!(eps > 0.0)) throw SolverError("penalization eps must be positive");
  if (!(pf.eta > 0.0)) throw SolverError("penalty eta must be positive");
  ValidationReport val = validate_spec(spec);
  if (!val.pass) {
    std::ostringstream msg;
    msg << "spec validation failed: min loop cost " << val.min_loop
        << ", min boundary compatibility " << std::min(val.min_compat1, val.min_compat2);
    throw SolverError(msg.str());
  }

  const GridSpec& g = spec.grid;
  ScalarField u1, u2;
  if (warm) {
    require_grid(spec, *warm);
    u1 = warm->u1;
    u2 = warm->u2;
  } else {
    u1 = blend_boundary(spec.g1);
    u2 = blend_boundary(spec.g2);
  }
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!g.on_boundary(i, j)) continue;
      u1.at(i, j) = spec.g1.at(i, j);
      u2.at(i, j) = spec.g2.at(i, j);
    }
  }

  const double scale = spec.scale();
  const double target = cfg.tol * scale;
  const int n = g.count();
  std::vector<double> F1(n, 0.0), F2(n, 0.0), d1(n, 0.0), d2(n, 0.0);
  ScalarField t1(g), t2(g);

  double fnorm = pen_residual(spec, pf, eps, u1, u2, F1, F2);
  for (int it = 0; it < kNewtonMax; ++it) {
    if (fnorm <= target) {
      SolutionPair out;
      out.u1 = std::move(u1);
      out.u2 = std::move(u2);
      out.method = "penalized";
      out.eps_schedule = {eps};
      out.iterations = it;
      out.final_residual = fnorm;
      return out;
    }
    newton_direction(spec, pf, eps, u1, u2, F1, F2, fnorm, cfg, d1, d2);
    double lambda = 1.0;
    while (true) {
      for (int k = 0; k < n; ++k) {
        t1.values[k] = u1.values[k] + lambda * d1[k];
        t2.values[k] = u2.values[k] + lambda * d2[k];
      }
      double tnorm = pen_residual(spec, pf, eps, t1, t2, F1, F2);
      if (tnorm < fnorm) {
        std::swap(u1, t1);
        std::swap(u2, t2);
        fnorm = tnorm;
        break;
      }
      lambda *= 0.5;
      if (lambda < std::ldexp(1.0, -30))
        throw SolverError(
            "penalized solver: line search stalled (eps too small for this grid; "
            "use a continuation schedule)");
    }
  }
  if (fnorm <= target) {
    SolutionPair out;
    out.u1 = std::move(u1);
    out.u2 = std::move(u2);
    out.method = "penalized";
    out.eps_schedule = {eps};
    out.iterations = kNewtonMax;
    out.final_residual = fnorm;
    return out;
  }
  std::ostringstream msg;
  msg << "penalized solver did not converge in " << kNewtonMax << " Newton steps; residual "
      << fnorm << " vs target " << target;
  throw SolverError(msg.str());
}

SolutionPair continuation_solve(const ProblemSpec& spec, const std::vector<double>& schedule,
                                const EllipticConfig& cfg, const PenaltyFunction& pf) {
  if (schedule.empty()) throw SolverError("eps schedule is empty");
  for (size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw SolverError("eps schedule must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1]))
      throw SolverError("eps schedule must be strictly decreasing");
  }
  SolutionPair pair;
  int total_iterations = 0;
  for (size_t k = 0; k < schedule.size(); ++k) {
    try {
      SolutionPair next =
          solve_penalized(spec, schedule[k], cfg, pf, k == 0 ? nullptr : &pair);
      total_iterations += next.iterations;
      pair = std::move(next);
    } catch (const SolverError& err) {
      std::ostringstream msg;
      msg << err.what() << " (continuation stage eps = " << schedule[k] << ")";
      throw SolverError(msg.str());
    }
  }
  pair.eps_schedule = schedule;
  pair.iterations = total_iterations;
  return pair;
}

SolutionPair solve_minimal(const ProblemSpec& spec, const EllipticConfig& cfg) {
  cfg.validate();
  ValidationReport val = validate_spec(spec);
  if (!val.pass) {
    std::ostringstream msg;
    msg << "spec validation failed: min loop cost " << val.min_loop
        << ", min boundary compatibility " << std::min(val.min_compat1, val.min_compat2);
    throw SolverError(msg.str());
  }

  const GridSpec& g = spec.grid;
  ScalarField forcing(g), lower(g), upper(g), gb(g);
  for (int k = 0; k < g.count(); ++k) {
    forcing.values[k] = spec.f2.values[k] - spec.f1.values[k];
    lower.values[k] = -spec.psi1.values[k];
    upper.values[k] = spec.psi2.values[k];
    gb.values[k] = spec.g1.values[k] - spec.g2.values[k];
    // validation already passed, so any inversion here is roundoff-sized
    if (lower.values[k] > upper.values[k]) {
      double mid = 0.5 * (lower.values[k] + upper.values[k]);
      lower.values[k] = upper.values[k] = mid;
    }
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.on_boundary(i, j))
        gb.at(i, j) = std::clamp(gb.at(i, j), lower.at(i, j), upper.at(i, j));

  EllipticResult U = solve_double_obstacle(forcing, lower, upper, gb, cfg);
  ScalarField lapU = laplacian(U.u);

  ScalarField rhs1(g);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      int k = g.idx(i, j);
      double m = -lapU.values[k] + spec.f1.values[k] - spec.f2.values[k];
      rhs1.values[k] = std::max(m, 0.0) - spec.f1.values[k];
    }
  }
  EllipticResult p1 = solve_poisson(rhs1, spec.g1, cfg);

  SolutionPair out;
  out.u1 = std::move(p1.u);
  out.u2 = ScalarField(g);
  for (int k = 0; k < g.count(); ++k) out.u2.values[k] = out.u1.values[k] - U.u.values[k];
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.on_boundary(i, j)) out.u2.at(i, j) = spec.g2.at(i, j);
  out.method = "minimal";
  out.iterations = U.sweeps + p1.sweeps;
  out.final_residual = std::max(U.residual, p1.residual);
  return out;
}

ResidualReport residual_report(const ProblemSpec& spec, const SolutionPair& pair) {
  require_grid(spec, pair);
  const GridSpec& g = spec.grid;
  ResidualReport rep;
  ScalarField lap1 = laplacian(pair.u1);
  ScalarField lap2 = laplacian(pair.u2);
  rep.theta1 = ScalarField(g);
  rep.theta2 = ScalarField(g);
  rep.op1 = ScalarField(g);
  rep.op2 = ScalarField(g);
  rep.min1 = ScalarField(g);
  rep.min2 = ScalarField(g);
  rep.min3 = ScalarField(g);
  rep.min_theta1 = std::numeric_limits<double>::infinity();
  rep.min_theta2 = std::numeric_limits<double>::infinity();

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      int k = g.idx(i, j);
      rep.theta1.values[k] =
          pair.u1.values[k] - pair.u2.values[k] + spec.psi1.values[k];
      rep.theta2.values[k] =
          pair.u2.values[k] - pair.u1.values[k] + spec.psi2.values[k];
      rep.min_theta1 = std::min(rep.min_theta1, rep.theta1.values[k]);
      rep.min_theta2 = std::min(rep.min_theta2, rep.theta2.values[k]);
      if (lap1.mask[k]) {
        rep.op1.mask[k] = rep.op2.mask[k] = 1;
        rep.min1.mask[k] = rep.min2.mask[k] = rep.min3.mask[k] = 1;
        continue;
      }
      rep.op1.values[k] = -lap1.values[k] + spec.f1.values[k];
      rep.op2.values[k] = -lap2.values[k] + spec.f2.values[k];
      rep.min1.values[k] = std::min(rep.op1.values[k], rep.theta1.values[k]);
      rep.min2.values[k] = std::min(rep.op2.values[k], rep.theta2.values[k]);
      rep.min3.values[k] = std::min(rep.op1.values[k], rep.op2.values[k]);
      rep.max_min1 = std::max(rep.max_min1, std::fabs(rep.min1.values[k]));
      rep.max_min2 = std::max(rep.max_min2, std::fabs(rep.min2.values[k]));
      rep.max_min3 = std::max(rep.max_min3, std::fabs(rep.min3.values[k]));
    }
  }
  rep.tol_sys = tol_sys_for(spec);
  rep.system_ok = rep.max_min1 <= rep.tol_sys && rep.max_min2 <= rep.tol_sys;
  rep.minimal_ok = rep.system_ok && rep.max_min3 <= rep.tol_sys;

  ScalarField lpsi1 = laplacian(spec.psi1);
  ScalarField lpsi2 = laplacian(spec.psi2);
  double max_lpsi = std::max(max_norm(lpsi1), max_norm(lpsi2));
  double max_f = std::max(max_norm(spec.f1), max_norm(spec.f2));
  rep.lap_bound_lhs = std::max(max_norm(lap1), max_norm(lap2));
  rep.lap_bound_rhs = max_lpsi + 3.0 * max_f + rep.tol_sys;
  rep.lap_bound_ok = rep.lap_bound_lhs <= rep.lap_bound_rhs;
  return rep;
}

SetPartition partition_sets(const ProblemSpec& spec, const SolutionPair& pair, double tau) {
  require_grid(spec, pair);
  const GridSpec& g = spec.grid;
  if (tau <= 0.0) {
    double h = std::max(g.hx(), g.hy());
    tau = 10.0 * h * h * spec.scale();
  }
  ResidualReport res = residual_report(spec, pair);

  SetPartition part;
  part.grid = g;
  part.tau = tau;
  part.label.assign(g.count(), RegionLabel::Unlabeled);

  std::vector<std::uint8_t> in_loop(g.count(), 0);
  for (int k = 0; k < g.count(); ++k)
    in_loop[k] = spec.psi1.values[k] + spec.psi2.values[k] <= tau ? 1 : 0;

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      int k = g.idx(i, j);
      if (in_loop[k]) {
        bool deep = true;
        for (int dj = -1; dj <= 1 && deep; ++dj)
          for (int di = -1; di <= 1 && deep; ++di) {
            if (di == 0 && dj == 0) continue;
            int ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
            if (!in_loop[g.idx(ii, jj)]) deep = false;
          }
        part.label[k] = deep ? RegionLabel::L0 : RegionLabel::LBoundary;
        continue;
      }
      if (g.on_boundary(i, j)) continue;
      double o1 = res.op1.values[k];
      double o2 = res.op2.values[k];
      if (o1 > tau && o2 > tau)
        part.label[k] = o2 > o1 ? RegionLabel::Omega2 : RegionLabel::Omega1;
      else if (o1 > tau)
        part.label[k] = RegionLabel::Omega1;
      else if (o2 > tau)
        part.label[k] = RegionLabel::Omega2;
      else if (res.theta1.values[k] > tau && res.theta2.values[k] > tau)
        part.label[k] = RegionLabel::Omega12;
    }
  }

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      bool near1 = false, near2 = false, nearL = false;
      for (int dj = -2; dj <= 2; ++dj) {
        for (int di = -2; di <= 2; ++di) {
          int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
          RegionLabel l = part.label[g.idx(ii, jj)];
          near1 = near1 || l == RegionLabel::Omega1;
          near2 = near2 || l == RegionLabel::Omega2;
          nearL = nearL || l == RegionLabel::LBoundary;
        }
      }
      if (near1 && near2 && nearL) part.meeting_points.push_back(g.idx(i, j));
    }
  }

  const char* names[] = {"unlabeled", "omega1", "omega2", "omega12", "l0", "l_boundary"};
  for (const char* n : names) part.counts[n] = 0;
  for (int k = 0; k < g.count(); ++k)
    ++part.counts[names[(int)part.label[k]]];
  part.counts["meeting_points"] = (int)part.meeting_points.size();
  return part;
}

NonminimalResult construct_nonminimal(const Expression& psi, double M, const Expression& q,
                                      const Expression& g1, const GridSpec& grid,
                                      const EllipticConfig& cfg) {
  cfg.validate();
  grid.validate();
  ScalarField psif = sample(psi, grid);
  ScalarField qf = sample(q, grid);
  ScalarField g1f = sample(g1, grid);
  for (int k = 0; k < grid.count(); ++k)
    if (qf.values[k] < 0.0) throw SolverError("nonminimal construction needs q >= 0");
  ScalarField lpsi = laplacian(psif);
  double lpsi_max = max_norm(lpsi);
  if (!(2.0 * M > lpsi_max)) {
    std::ostringstream msg;
    msg << "nonminimal construction needs 2M > max |lap psi| = " << lpsi_max;
    throw SolverError(msg.str());
  }

  ScalarField rhs(grid);
  for (int k = 0; k < grid.count(); ++k) rhs.values[k] = M + qf.values[k];
  EllipticResult p = solve_poisson(rhs, g1f, cfg);

  NonminimalResult out;
  out.pair.u1 = std::move(p.u);
  out.pair.u2 = ScalarField(grid);
  for (int k = 0; k < grid.count(); ++k)
    out.pair.u2.values[k] = out.pair.u1.values[k] + psif.values[k];
  out.pair.method = "nonminimal";
  out.pair.iterations = p.sweeps;
  out.pair.final_residual = p.residual;

  ScalarField f1(grid, -M), f2(grid, M), psi2(grid), g2(grid);
  for (int k = 0; k < grid.count(); ++k) {
    psi2.values[k] = -psif.values[k];
    g2.values[k] = g1f.values[k] + psif.values[k];
  }
  out.spec = ProblemSpec::from_fields(std::move(f1), std::move(f2), std::move(psif),
                                      std::move(psi2), std::move(g1f), std::move(g2));
  out.spec.sources["f1"] = "-" + fmt17(M);
  out.spec.sources["f2"] = fmt17(M);
  out.spec.sources["psi1"] = pretty_print(psi);
  out.spec.sources["psi2"] = "-(" + pretty_print(psi) + ")";
  out.spec.sources["g1"] = pretty_print(g1);
  out.spec.sources["g2"] = "<builtin>";
  out.spec.sources["q"] = pretty_print(q);
  return out;
}

void write_solution_csv(const ProblemSpec& spec, const SolutionPair& pair, std::ostream& os) {
  require_grid(spec, pair);
  const GridSpec& g = spec.grid;
  ScalarField lap1 = laplacian(pair.u1);
  ScalarField lap2 = laplacian(pair.u2);
  os << "x,y,u1,u2,theta1,theta2,lapu1,lapu2\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    os << buf;
  };
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      int k = g.idx(i, j);
      put(g.x(i), ',');
      put(g.y(j), ',');
      put(pair.u1.values[k], ',');
      put(pair.u2.values[k], ',');
      put(pair.u1.values[k] - pair.u2.values[k] + spec.psi1.values[k], ',');
      put(pair.u2.values[k] - pair.u1.values[k] + spec.psi2.values[k], ',');
      if (lap1.mask[k])
        os << "nan,nan\n";
      else {
        put(lap1.values[k], ',');
        put(lap2.values[k], '\n');
      }
    }
  }
}

void write_solution_csv(const ProblemSpec& spec, const SolutionPair& pair,
                        const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw GridError("cannot open " + path + " for writing");
  write_solution_csv(spec, pair, f);
}

}  // namespace switchreg
