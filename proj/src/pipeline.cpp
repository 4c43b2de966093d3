#include "switchreg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "switchreg/closedform.hpp"
#include "switchreg/errors.hpp"
#include "switchreg/expr.hpp"
#include "switchreg/regularity.hpp"

namespace switchreg {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output.dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void emit(const RunConfig& cfg, const std::string& name, json j, bool quiet) {
  j["config"] = config_to_json(cfg);
  std::filesystem::path path = ensure_out_dir(cfg) / name;
  write_json_file(j, path.string());
  if (!quiet) std::cout << "wrote " << path.string() << "\n";
}

std::vector<std::string> methods_of(const SolverConfig& s) {
  if (s.method == "both") return {"penalized", "minimal"};
  return {s.method};
}

SolutionPair solve_by(const std::string& method, const ProblemSpec& spec, const SolverConfig& s) {
  if (method == "penalized") {
    PenaltyFunction pf;
    pf.eta = s.eta;
    return continuation_solve(spec, s.eps_schedule, s.elliptic(), pf);
  }
  return solve_minimal(spec, s.elliptic());
}

json validation_json(const ValidationReport& v) {
  return json{{"pass", v.pass},
              {"threshold", v.threshold},
              {"min_loop", v.min_loop},
              {"min_loop_node", v.min_loop_node},
              {"min_compat1", v.min_compat1},
              {"min_compat1_node", v.min_compat1_node},
              {"min_compat2", v.min_compat2},
              {"min_compat2_node", v.min_compat2_node}};
}

json residual_json(const ResidualReport& r) {
  return json{{"max_min1", r.max_min1},
              {"max_min2", r.max_min2},
              {"max_min3", r.max_min3},
              {"min_theta1", r.min_theta1},
              {"min_theta2", r.min_theta2},
              {"tol_sys", r.tol_sys},
              {"system_ok", r.system_ok},
              {"minimal_ok", r.minimal_ok},
              {"lap_bound_lhs", r.lap_bound_lhs},
              {"lap_bound_rhs", r.lap_bound_rhs},
              {"lap_bound_ok", r.lap_bound_ok}};
}

json pair_json(const SolutionPair& p) {
  json j{{"method", p.method},
         {"iterations", p.iterations},
         {"final_residual", p.final_residual}};
  if (!p.eps_schedule.empty()) j["eps_schedule"] = p.eps_schedule;
  return j;
}

json fit_json(const ExponentFit& f) {
  return json{{"exponent", f.exponent}, {"r2", f.r2}, {"infinite", f.infinite}};
}

json regularity_report_json(const RegularityReport& r) {
  return json{{"cx", r.cx},
              {"cy", r.cy},
              {"radii", r.radii},
              {"s_values", r.s_values},
              {"s_fit", fit_json(r.s_fit)},
              {"a_norms", r.a_norms},
              {"a_slope", r.a_slope},
              {"a_intercept", r.a_intercept},
              {"a_r2", r.a_r2},
              {"sup_dev", r.sup_dev},
              {"sup_fit", fit_json(r.sup_fit)},
              {"scale", r.scale},
              {"a_tol", r.a_tol},
              {"s_over_r2_bound", r.s_over_r2_bound},
              {"max_s_over_r2", r.max_s_over_r2},
              {"s_bound_evaluated", r.s_bound_evaluated},
              {"s_bound_ok", r.s_bound_ok},
              {"classification", to_string(r.classification)},
              {"alpha", r.alpha},
              {"notes", r.notes}};
}

json counterexample_json(const CounterexampleReport& r) {
  return json{{"nx", r.nx},
              {"ny", r.ny},
              {"rho_excl", r.rho_excl},
              {"tol", r.tol},
              {"nodes_checked", r.nodes_checked},
              {"max_system_residual_1", r.max_system_residual_1},
              {"max_system_residual_2", r.max_system_residual_2},
              {"max_contact_residual_1", r.max_contact_residual_1},
              {"max_contact_residual_2", r.max_contact_residual_2},
              {"pass", r.pass},
              {"notes", r.notes}};
}

json partition_json(const SetPartition& p) {
  json counts;
  for (const auto& [name, n] : p.counts) counts[name] = n;
  return json{{"tau", p.tau},
              {"counts", counts},
              {"meeting_points", static_cast<int>(p.meeting_points.size())}};
}

void write_fields_csv(const GridSpec& g,
                      const std::vector<std::pair<std::string, const ScalarField*>>& cols,
                      const std::string& path) {
  std::ofstream os(path);
  if (!os) throw GridError("cannot open " + path + " for writing");
  os << "x,y";
  for (const auto& [name, f] : cols) os << ',' << name;
  os << '\n';
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      os << fmt17(g.x(i)) << ',' << fmt17(g.y(j));
      for (const auto& col : cols)
        os << ',' << (col.second->masked(i, j) ? std::string("nan") : fmt17(col.second->at(i, j)));
      os << '\n';
    }
  }
}

// The penalized path satisfies the obstacle constraints only up to O(eps), so
// its residual gate widens by the final eps; the minimal path gets none.
bool residuals_ok(const std::string& method, const ResidualReport& r, double eps_slack) {
  const double allowed = r.tol_sys + eps_slack;
  bool ok = r.max_min1 <= allowed && r.max_min2 <= allowed;
  if (method == "minimal") ok = ok && r.minimal_ok;
  return ok;
}

int thread_cap() {
  const char* s = std::getenv("SWITCHREG_THREADS");
  if (!s) return 1;
  int v = std::atoi(s);
  return v < 1 ? 1 : v;
}

// Probes run in blocks of at most thread_cap(); results land by index, so the
// report order never depends on scheduling.
std::vector<RegularityReport> classify_probes(const ProblemSpec& spec, const SolutionPair& pair,
                                              const RegularityConfig& rc,
                                              const std::vector<double>& radii) {
  const auto& probes = rc.probes;
  const RegularityOptions opts = rc.options();
  std::vector<RegularityReport> out(probes.size());
  const size_t cap = static_cast<size_t>(thread_cap());
  for (size_t base = 0; base < probes.size(); base += cap) {
    const size_t hi = std::min(probes.size(), base + cap);
    std::vector<std::future<RegularityReport>> fut;
    for (size_t k = base + 1; k < hi; ++k)
      fut.push_back(std::async(std::launch::async, [&, k] {
        return classify_point(spec, pair, probes[k].first, probes[k].second, radii, opts);
      }));
    out[base] = classify_point(spec, pair, probes[base].first, probes[base].second, radii, opts);
    for (size_t k = base + 1; k < hi; ++k) out[k] = fut[k - base - 1].get();
  }
  return out;
}

}  // namespace

ProblemSpec make_spec(const ProblemConfig& p) {
  return ProblemSpec::from_expressions(p.f1, p.f2, p.psi1, p.psi2, p.g1, p.g2, p.grid());
}

int run_solve(const RunConfig& cfg, bool quiet) {
  ProblemSpec spec = make_spec(cfg.problem);
  ValidationReport val = validate_spec(spec);
  json j;
  j["validation"] = validation_json(val);
  if (!val.pass) {
    j["results"] = json::array();
    j["ok"] = false;
    emit(cfg, "solve.json", std::move(j), quiet);
    if (!quiet) std::cout << "spec validation failed, nothing solved\n";
    return 1;
  }

  const double scale = spec.scale();
  bool all_ok = true;
  json results = json::array();
  for (const std::string& method : methods_of(cfg.solver)) {
    SolutionPair pair = solve_by(method, spec, cfg.solver);
    ResidualReport rep = residual_report(spec, pair);
    const double slack =
        method == "penalized" ? cfg.solver.eps_schedule.back() * scale : 0.0;
    const bool ok = residuals_ok(method, rep, slack);
    all_ok = all_ok && ok;

    json r = pair_json(pair);
    r["residuals"] = residual_json(rep);
    r["allowed_residual"] = rep.tol_sys + slack;
    r["ok"] = ok;
    results.push_back(std::move(r));

    if (cfg.output.has("csv"))
      write_solution_csv(spec, pair,
                         (ensure_out_dir(cfg) / ("solution_" + method + ".csv")).string());
    if (!quiet)
      std::cout << method << ": iterations = " << pair.iterations
                << ", max system residual = " << std::max(rep.max_min1, rep.max_min2)
                << ", allowed = " << rep.tol_sys + slack << (ok ? " (ok)" : " (FAIL)") << "\n";
  }
  j["results"] = std::move(results);
  j["ok"] = all_ok;
  emit(cfg, "solve.json", std::move(j), quiet);
  return all_ok ? 0 : 1;
}

int run_residuals(const RunConfig& cfg, bool quiet) {
  ProblemSpec spec = make_spec(cfg.problem);
  ValidationReport val = validate_spec(spec);
  json j;
  j["validation"] = validation_json(val);
  if (!val.pass) {
    j["results"] = json::array();
    j["ok"] = false;
    emit(cfg, "residuals.json", std::move(j), quiet);
    return 1;
  }

  const double scale = spec.scale();
  bool all_ok = true;
  json results = json::array();
  for (const std::string& method : methods_of(cfg.solver)) {
    SolutionPair pair = solve_by(method, spec, cfg.solver);
    ResidualReport rep = residual_report(spec, pair);
    SetPartition part = partition_sets(spec, pair);
    const double slack =
        method == "penalized" ? cfg.solver.eps_schedule.back() * scale : 0.0;
    const bool ok = residuals_ok(method, rep, slack);
    all_ok = all_ok && ok;

    json r = pair_json(pair);
    r["residuals"] = residual_json(rep);
    r["partition"] = partition_json(part);
    r["allowed_residual"] = rep.tol_sys + slack;
    r["ok"] = ok;
    results.push_back(std::move(r));

    if (cfg.output.has("csv"))
      write_fields_csv(spec.grid,
                       {{"min1", &rep.min1},
                        {"min2", &rep.min2},
                        {"min3", &rep.min3},
                        {"theta1", &rep.theta1},
                        {"theta2", &rep.theta2},
                        {"op1", &rep.op1},
                        {"op2", &rep.op2}},
                       (ensure_out_dir(cfg) / ("residual_fields_" + method + ".csv")).string());
    if (!quiet)
      std::cout << method << ": max min-residuals = (" << rep.max_min1 << ", " << rep.max_min2
                << ", " << rep.max_min3 << ")" << (ok ? " (ok)" : " (FAIL)") << "\n";
  }
  j["results"] = std::move(results);
  j["ok"] = all_ok;
  emit(cfg, "residuals.json", std::move(j), quiet);
  return all_ok ? 0 : 1;
}

int run_regularity(const RunConfig& cfg, bool quiet) {
  ProblemSpec spec = make_spec(cfg.problem);
  ValidationReport val = validate_spec(spec);
  json j;
  j["validation"] = validation_json(val);
  if (!val.pass) {
    j["results"] = json::array();
    j["ok"] = false;
    emit(cfg, "regularity.json", std::move(j), quiet);
    return 1;
  }

  const std::vector<double> radii = cfg.regularity.radii_for(spec.grid);
  bool all_ok = true;
  json results = json::array();
  for (const std::string& method : methods_of(cfg.solver)) {
    SolutionPair pair = solve_by(method, spec, cfg.solver);
    std::vector<RegularityReport> reports = classify_probes(spec, pair, cfg.regularity, radii);
    json probes = json::array();
    for (const RegularityReport& rep : reports) {
      all_ok = all_ok && rep.s_bound_ok;
      probes.push_back(regularity_report_json(rep));
      if (!quiet) {
        const char* suffix = rep.s_bound_ok            ? ""
                             : rep.s_bound_evaluated   ? " (quadratic-decay bound FAILED)"
                                                       : " (quadratic-decay bound not evaluated)";
        std::cout << method << " @ (" << rep.cx << ", " << rep.cy
                  << "): " << to_string(rep.classification) << suffix << "\n";
      }
    }
    json r = pair_json(pair);
    r["probes"] = std::move(probes);
    results.push_back(std::move(r));
  }
  j["results"] = std::move(results);
  j["ok"] = all_ok;
  emit(cfg, "regularity.json", std::move(j), quiet);
  return all_ok ? 0 : 1;
}

int run_counterexample(const RunConfig& cfg, bool quiet) {
  // The closed forms live on [-1,1]^2; only the resolution is configurable.
  GridSpec g{-1.0, 1.0, -1.0, 1.0, cfg.problem.nx, cfg.problem.ny};
  g.validate();
  const double h = std::max(g.hx(), g.hy());
  // the checker needs the exclusion ball to cover a 4h neighborhood, so the
  // default radius widens on coarse grids
  const double rho = std::max(0.05, 4.0 * h);
  const double tol = 100.0 * h * h * (1.0 + std::fabs(std::log(h)));

  CounterexampleReport rep = verify_counterexample(g, rho, tol);

  ProblemSpec spec = counterexample_spec(g);
  SolutionPair pair = solve_minimal(spec, cfg.solver.elliptic());
  double err1 = 0.0, err2 = 0.0;
  for (int jn = 0; jn < g.ny; ++jn)
    for (int in = 0; in < g.nx; ++in) {
      const double x = g.x(in), y = g.y(jn);
      err1 = std::max(err1, std::fabs(pair.u1.at(in, jn) - ce_u1(x, y)));
      err2 = std::max(err2, std::fabs(pair.u2.at(in, jn) - ce_u2(x, y)));
    }

  json j;
  j["verify"] = counterexample_json(rep);
  j["solver_comparison"] = json{{"sup_err_u1", err1},
                                {"sup_err_u2", err2},
                                {"iterations", pair.iterations},
                                {"final_residual", pair.final_residual}};
  j["ok"] = rep.pass;
  if (cfg.output.has("csv"))
    write_solution_csv(spec, pair, (ensure_out_dir(cfg) / "solution_minimal.csv").string());
  emit(cfg, "counterexample.json", std::move(j), quiet);
  if (!quiet)
    std::cout << "verify: " << (rep.pass ? "pass" : "FAIL")
              << ", solver sup-errors = (" << err1 << ", " << err2 << ")\n";
  return rep.pass ? 0 : 1;
}

int run_sweep_eps(const RunConfig& cfg, bool quiet) {
  ProblemSpec spec = make_spec(cfg.problem);
  ValidationReport val = validate_spec(spec);
  json j;
  j["validation"] = validation_json(val);
  if (!val.pass) {
    j["stages"] = json::array();
    j["ok"] = false;
    emit(cfg, "sweep.json", std::move(j), quiet);
    return 1;
  }

  PenaltyFunction pf;
  pf.eta = cfg.solver.eta;
  const EllipticConfig ecfg = cfg.solver.elliptic();
  std::vector<double> eps_list, violations;
  json stages = json::array();
  SolutionPair warm;
  bool have_warm = false;
  for (double eps : cfg.solver.eps_schedule) {
    SolutionPair p = solve_penalized(spec, eps, ecfg, pf, have_warm ? &warm : nullptr);
    ResidualReport rep = residual_report(spec, p);
    const double viol = std::max(0.0, -std::min(rep.min_theta1, rep.min_theta2));
    eps_list.push_back(eps);
    violations.push_back(viol);
    stages.push_back(json{{"eps", eps},
                          {"violation", viol},
                          {"iterations", p.iterations},
                          {"residual", p.final_residual}});
    if (!quiet)
      std::cout << "eps = " << eps << ": violation = " << viol
                << ", iterations = " << p.iterations << "\n";
    warm = std::move(p);
    have_warm = true;
  }

  json fit;
  std::vector<std::string> notes;
  if (eps_list.size() >= 4) {
    ExponentFit f = fit_exponent(eps_list, violations);
    fit = fit_json(f);
    if (!quiet && !f.infinite)
      std::cout << "violation ~ eps^" << f.exponent << " (R^2 = " << f.r2 << ")\n";
  } else {
    notes.push_back("need at least 4 schedule stages for a rate fit");
  }
  j["stages"] = std::move(stages);
  j["rate_fit"] = std::move(fit);
  j["notes"] = notes;
  j["ok"] = true;
  emit(cfg, "sweep.json", std::move(j), quiet);
  return 0;
}

int run_nonminimal(const RunConfig& cfg, bool quiet) {
  const GridSpec g = cfg.problem.grid();
  const Expression psi = parse_expression(cfg.problem.psi1);
  const Expression g1e = parse_expression(cfg.problem.g1);
  const EllipticConfig ecfg = cfg.solver.elliptic();

  // M clears the construction's 2M > max|lap psi| requirement with room
  const double lap_psi = max_norm(laplacian(sample(psi, g)));
  const double M = std::max(1.0, lap_psi);

  const Expression q_zero = parse_expression("0");
  const Expression q_pos = parse_expression(fmt17(M));
  NonminimalResult v0 = construct_nonminimal(psi, M, q_zero, g1e, g, ecfg);
  NonminimalResult v1 = construct_nonminimal(psi, M, q_pos, g1e, g, ecfg);

  SolutionPair minimal = solve_minimal(v0.spec, ecfg);
  const double scale = v0.spec.scale();
  const double tol_cmp = 1e-6 * scale;

  auto excess_over = [&](const SolutionPair& v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < g.count(); ++k) {
      worst = std::max(worst, minimal.u1.values[k] - v.u1.values[k]);
      worst = std::max(worst, minimal.u2.values[k] - v.u2.values[k]);
    }
    return worst;
  };
  const double excess0 = excess_over(v0.pair);
  const double excess1 = excess_over(v1.pair);
  ResidualReport rep1 = residual_report(v1.spec, v1.pair);

  const bool dominated = excess0 <= tol_cmp && excess1 <= tol_cmp;
  const bool witnessed = rep1.max_min3 >= 0.5 * M;
  const bool ok = dominated && witnessed;

  json j;
  j["M"] = M;
  j["comparison_tol"] = tol_cmp;
  j["pairs"] = json::array({json{{"q", "0"}, {"excess_of_minimal", excess0}},
                            json{{"q", fmt17(M)},
                                 {"excess_of_minimal", excess1},
                                 {"third_equation_violation", rep1.max_min3}}});
  j["minimal_dominated"] = dominated;
  j["violation_witnessed"] = witnessed;
  j["ok"] = ok;
  emit(cfg, "nonminimal.json", std::move(j), quiet);
  if (!quiet)
    std::cout << "minimal below both constructed pairs: " << (dominated ? "yes" : "NO")
              << "; third-equation violation " << rep1.max_min3 << " (need >= " << 0.5 * M
              << ")\n";
  return ok ? 0 : 1;
}

}  // namespace switchreg
