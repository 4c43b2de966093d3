#pragma once

#include <string>
#include <utility>
#include <vector>

#include "switchreg/jsonio.hpp"
#include "switchreg/obstacle.hpp"
#include "switchreg/regularity.hpp"

namespace switchreg {

/// Run configuration, read from a flat INI-style file: `[section]` headers,
/// `key = value` lines, `#` comments. Expressions and lists are quoted
/// strings; numbers are bare. Unknown sections or keys are errors. Missing
/// keys keep the defaults below.
struct ProblemConfig {
  std::string f1 = "0", f2 = "0", psi1 = "0", psi2 = "0", g1 = "0", g2 = "0";
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  int nx = 65, ny = 65;

  GridSpec grid() const;
};

struct SolverConfig {
  std::string method = "minimal";  // penalized | minimal | both
  std::vector<double> eps_schedule = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  double tol = 1e-10;
  int max_iter = 0;  // 0 = auto
  double omega = 1.8;
  double eta = 1.0;

  EllipticConfig elliptic() const;
};

struct RegularityConfig {
  std::vector<std::pair<double, double>> probes = {{0.0, 0.0}};
  std::vector<double> radii;  // empty = default dyadic ladder for the grid
  double exponent_margin = 0.1;
  double r2_s_min = 0.95;
  double r2_a_min = 0.9;
  double a_tol_rel = 0.02;

  RegularityOptions options() const;
  std::vector<double> radii_for(const GridSpec& g) const;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats = {"csv", "json"};

  bool has(const std::string& fmt) const;
};

struct RunConfig {
  ProblemConfig problem;
  SolverConfig solver;
  RegularityConfig regularity;
  OutputConfig output;
};

/// Parses and validates configuration text. Throws ConfigError with a line
/// number for syntax problems and with the offending field name for semantic
/// ones (bad method, non-decreasing schedule, unparsable expression, ...).
RunConfig parse_config(const std::string& text);

/// parse_config over the file's contents; missing file is a ConfigError.
RunConfig load_config(const std::string& path);

/// Full effective configuration (defaults filled in, radii resolved against
/// the grid), embedded in every emitted report.
json config_to_json(const RunConfig& cfg);

}  // namespace switchreg
