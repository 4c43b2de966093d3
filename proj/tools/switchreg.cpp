#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "switchreg/config.hpp"
#include "switchreg/errors.hpp"
#include "switchreg/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int n = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "run configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory (overrides the config)");
  cmd->add_option("--n", o.n, "override both grid dimensions")->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", o.quiet, "suppress progress output");
}

switchreg::RunConfig build_config(const CommonOpts& o, int default_n) {
  switchreg::RunConfig cfg;
  if (!o.config_path.empty()) cfg = switchreg::load_config(o.config_path);
  else if (default_n > 0) cfg.problem.nx = cfg.problem.ny = default_n;
  if (o.n > 0) {
    cfg.problem.nx = o.n;
    cfg.problem.ny = o.n;
  }
  if (!o.out_dir.empty()) cfg.output.dir = o.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference solver and regularity analyzer for two-mode switching systems"};
  app.require_subcommand(1);

  CommonOpts solve_o, resid_o, reg_o, ce_o, sweep_o, nonmin_o;
  CLI::App* solve =
      app.add_subcommand("solve", "solve the configured system and check its residuals");
  add_common(solve, solve_o);
  CLI::App* resid =
      app.add_subcommand("residuals", "solve, then export residual fields and the set partition");
  add_common(resid, resid_o);
  CLI::App* reg =
      app.add_subcommand("regularity", "classify the solution's regularity at the probe points");
  add_common(reg, reg_o);
  CLI::App* ce = app.add_subcommand(
      "counterexample", "check the closed-form pair with unbounded Hessian and solve its spec");
  add_common(ce, ce_o);
  CLI::App* sweep = app.add_subcommand(
      "sweep-eps", "fit the constraint-violation rate across the penalty schedule");
  add_common(sweep, sweep_o);
  CLI::App* nonmin = app.add_subcommand(
      "nonminimal", "build non-minimal solution pairs and compare against the minimal one");
  add_common(nonmin, nonmin_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return switchreg::run_solve(build_config(solve_o, 0), solve_o.quiet);
    if (resid->parsed())
      return switchreg::run_residuals(build_config(resid_o, 0), resid_o.quiet);
    if (reg->parsed()) return switchreg::run_regularity(build_config(reg_o, 0), reg_o.quiet);
    if (ce->parsed())
      return switchreg::run_counterexample(build_config(ce_o, 257), ce_o.quiet);
    if (sweep->parsed()) return switchreg::run_sweep_eps(build_config(sweep_o, 0), sweep_o.quiet);
    if (nonmin->parsed())
      return switchreg::run_nonminimal(build_config(nonmin_o, 0), nonmin_o.quiet);
  } catch (const switchreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const switchreg::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
