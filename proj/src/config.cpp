#include "switchreg/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "switchreg/errors.hpp"
#include "switchreg/expr.hpp"

namespace switchreg {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strips a trailing # comment, ignoring # inside double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    else if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& value, const std::string& field, int line) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field + ": expected a number, got '" + value + "'", line);
  }
}

int parse_int(const std::string& value, const std::string& field, int line) {
  double v = parse_number(value, field, line);
  if (v != std::floor(v)) throw ConfigError(field + ": expected an integer, got '" + value + "'", line);
  return static_cast<int>(v);
}

// Quoted values carry expressions and lists; strip the quotes here.
std::string unquote(const std::string& value, const std::string& field, int line) {
  if (value.size() < 2 || value.front() != '"' || value.back() != '"')
    throw ConfigError(field + ": expected a quoted string", line);
  return value.substr(1, value.size() - 2);
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field, int line) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[' && body.back() == ']')
    body = body.substr(1, body.size() - 2);
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number(item, field, line));
  }
  return out;
}

// Probe lists look like "(0,0); (0.5, 0.5)".
std::vector<std::pair<double, double>> parse_probe_list(const std::string& text,
                                                        const std::string& field, int line) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item.front() != '(' || item.back() != ')')
      throw ConfigError(field + ": expected probes like \"(0,0); (0.5,0.5)\"", line);
    std::string body = item.substr(1, item.size() - 2);
    size_t comma = body.find(',');
    if (comma == std::string::npos)
      throw ConfigError(field + ": probe '" + item + "' needs two coordinates", line);
    out.emplace_back(parse_number(trim(body.substr(0, comma)), field, line),
                     parse_number(trim(body.substr(comma + 1)), field, line));
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void check_expression(const std::string& text, const std::string& field, int line) {
  try {
    parse_expression(text);
  } catch (const ParseError& e) {
    throw ConfigError(field + ": " + e.what(), line);
  }
}

void validate(const RunConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  if (!(p.xmin < p.xmax)) throw ConfigError("problem.xmin must be below problem.xmax");
  if (!(p.ymin < p.ymax)) throw ConfigError("problem.ymin must be below problem.ymax");
  if (p.nx < 3 || p.ny < 3) throw ConfigError("problem.nx and problem.ny must be at least 3");

  const SolverConfig& s = cfg.solver;
  if (s.method != "penalized" && s.method != "minimal" && s.method != "both")
    throw ConfigError("solver.method must be penalized, minimal, or both, got '" + s.method + "'");
  if (s.eps_schedule.empty()) throw ConfigError("solver.eps_schedule must not be empty");
  for (size_t i = 0; i < s.eps_schedule.size(); ++i) {
    if (!(s.eps_schedule[i] > 0.0))
      throw ConfigError("solver.eps_schedule entries must be positive");
    if (i > 0 && !(s.eps_schedule[i] < s.eps_schedule[i - 1]))
      throw ConfigError("solver.eps_schedule must be strictly decreasing");
  }
  if (!(s.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (s.max_iter < 0) throw ConfigError("solver.max_iter must be nonnegative");
  if (!(s.omega > 0.0 && s.omega < 2.0)) throw ConfigError("solver.omega must lie in (0, 2)");
  if (!(s.eta > 0.0)) throw ConfigError("solver.eta must be positive");

  const RegularityConfig& r = cfg.regularity;
  if (r.probes.empty()) throw ConfigError("regularity.probes must not be empty");
  for (double rad : r.radii)
    if (!(rad > 0.0)) throw ConfigError("regularity.radii entries must be positive");
  if (!(r.exponent_margin > 0.0)) throw ConfigError("regularity.exponent_margin must be positive");
  if (!(r.r2_s_min >= 0.0 && r.r2_s_min <= 1.0)) throw ConfigError("regularity.r2_s_min must lie in [0, 1]");
  if (!(r.r2_a_min >= 0.0 && r.r2_a_min <= 1.0)) throw ConfigError("regularity.r2_a_min must lie in [0, 1]");
  if (!(r.a_tol_rel > 0.0)) throw ConfigError("regularity.a_tol_rel must be positive");

  if (cfg.output.dir.empty()) throw ConfigError("output.dir must not be empty");
  for (const std::string& f : cfg.output.formats)
    if (f != "csv" && f != "json")
      throw ConfigError("output.formats entries must be csv or json, got '" + f + "'");
}

}  // namespace

GridSpec ProblemConfig::grid() const { return GridSpec{xmin, xmax, ymin, ymax, nx, ny}; }

EllipticConfig SolverConfig::elliptic() const {
  EllipticConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.omega = omega;
  return cfg;
}

RegularityOptions RegularityConfig::options() const {
  RegularityOptions opt;
  opt.exponent_margin = exponent_margin;
  opt.r2_s_min = r2_s_min;
  opt.r2_a_min = r2_a_min;
  opt.a_tol_rel = a_tol_rel;
  return opt;
}

std::vector<double> RegularityConfig::radii_for(const GridSpec& g) const {
  return radii.empty() ? default_radii(g) : radii;
}

bool OutputConfig::has(const std::string& fmt) const {
  for (const std::string& f : formats)
    if (f == fmt) return true;
  return false;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (section != "problem" && section != "solver" && section != "regularity" &&
          section != "output")
        throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line);
    if (key.empty()) throw ConfigError("empty key", line);
    if (value.empty()) throw ConfigError(section + "." + key + ": empty value", line);
    const std::string field = section + "." + key;

    if (section == "problem") {
      ProblemConfig& p = cfg.problem;
      if (key == "f1" || key == "f2" || key == "psi1" || key == "psi2" || key == "g1" ||
          key == "g2") {
        std::string expr = unquote(value, field, line);
        check_expression(expr, field, line);
        (key == "f1"     ? p.f1
         : key == "f2"   ? p.f2
         : key == "psi1" ? p.psi1
         : key == "psi2" ? p.psi2
         : key == "g1"   ? p.g1
                         : p.g2) = expr;
      } else if (key == "xmin") p.xmin = parse_number(value, field, line);
      else if (key == "xmax") p.xmax = parse_number(value, field, line);
      else if (key == "ymin") p.ymin = parse_number(value, field, line);
      else if (key == "ymax") p.ymax = parse_number(value, field, line);
      else if (key == "nx") p.nx = parse_int(value, field, line);
      else if (key == "ny") p.ny = parse_int(value, field, line);
      else throw ConfigError("unknown key '" + key + "' in [problem]", line);
    } else if (section == "solver") {
      SolverConfig& sv = cfg.solver;
      if (key == "method") sv.method = unquote(value, field, line);
      else if (key == "eps_schedule")
        sv.eps_schedule = parse_number_list(unquote(value, field, line), field, line);
      else if (key == "tol") sv.tol = parse_number(value, field, line);
      else if (key == "max_iter") sv.max_iter = parse_int(value, field, line);
      else if (key == "omega") sv.omega = parse_number(value, field, line);
      else if (key == "eta") sv.eta = parse_number(value, field, line);
      else throw ConfigError("unknown key '" + key + "' in [solver]", line);
    } else if (section == "regularity") {
      RegularityConfig& r = cfg.regularity;
      if (key == "probes") r.probes = parse_probe_list(unquote(value, field, line), field, line);
      else if (key == "radii")
        r.radii = parse_number_list(unquote(value, field, line), field, line);
      else if (key == "exponent_margin") r.exponent_margin = parse_number(value, field, line);
      else if (key == "r2_s_min") r.r2_s_min = parse_number(value, field, line);
      else if (key == "r2_a_min") r.r2_a_min = parse_number(value, field, line);
      else if (key == "a_tol_rel") r.a_tol_rel = parse_number(value, field, line);
      else throw ConfigError("unknown key '" + key + "' in [regularity]", line);
    } else {
      OutputConfig& o = cfg.output;
      if (key == "dir") o.dir = unquote(value, field, line);
      else if (key == "formats") o.formats = parse_string_list(unquote(value, field, line));
      else throw ConfigError("unknown key '" + key + "' in [output]", line);
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["problem"] = {{"f1", cfg.problem.f1},     {"f2", cfg.problem.f2},
                  {"psi1", cfg.problem.psi1}, {"psi2", cfg.problem.psi2},
                  {"g1", cfg.problem.g1},     {"g2", cfg.problem.g2},
                  {"xmin", cfg.problem.xmin}, {"xmax", cfg.problem.xmax},
                  {"ymin", cfg.problem.ymin}, {"ymax", cfg.problem.ymax},
                  {"nx", cfg.problem.nx},     {"ny", cfg.problem.ny}};
  j["solver"] = {{"method", cfg.solver.method},
                 {"eps_schedule", cfg.solver.eps_schedule},
                 {"tol", cfg.solver.tol},
                 {"max_iter", cfg.solver.max_iter},
                 {"omega", cfg.solver.omega},
                 {"eta", cfg.solver.eta}};
  json probes = json::array();
  for (const auto& [px, py] : cfg.regularity.probes) probes.push_back({{"x", px}, {"y", py}});
  j["regularity"] = {{"probes", probes},
                     {"radii", cfg.regularity.radii_for(cfg.problem.grid())},
                     {"exponent_margin", cfg.regularity.exponent_margin},
                     {"r2_s_min", cfg.regularity.r2_s_min},
                     {"r2_a_min", cfg.regularity.r2_a_min},
                     {"a_tol_rel", cfg.regularity.a_tol_rel}};
  j["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};
  return j;
}

}  // namespace switchreg
