#pragma once

#include "switchreg/config.hpp"
#include "switchreg/switching.hpp"

namespace switchreg {

/// Samples the six configured expressions on the configured grid.
ProblemSpec make_spec(const ProblemConfig& p);

/// Subcommand drivers. Each writes its JSON report (and CSV field dumps when
/// the csv format is enabled) under cfg.output.dir and returns the process
/// exit code: 0 when every check passed, 1 otherwise. All reports embed the
/// full effective config and contain nothing run-dependent, so identical
/// configs produce byte-identical files.
int run_solve(const RunConfig& cfg, bool quiet);
int run_residuals(const RunConfig& cfg, bool quiet);
int run_regularity(const RunConfig& cfg, bool quiet);
int run_counterexample(const RunConfig& cfg, bool quiet);
int run_sweep_eps(const RunConfig& cfg, bool quiet);
int run_nonminimal(const RunConfig& cfg, bool quiet);

}  // namespace switchreg
