#include "poroscale/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "poroscale/errors.hpp"

namespace poroscale {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"geometry", {"shape", "r0", "r1", "n"}},
      {"evolution", {"vn", "dt", "steps"}},
      {"tables", {"samples", "with_permeability", "delta"}},
      {"macro",
       {"nx", "ny", "lx", "ly", "coupling", "advection", "left", "right", "bottom", "top", "c_left",
        "c_right", "c_bottom", "c_top", "c0", "phi0", "s0", "s_rate", "vn_sign", "T", "dt",
        "flux_in"}},
      {"output", {"dir", "vtk", "csv"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct RawItem {
  std::string value;
  int line = 0;
};

class RawConfig {
 public:
  RawConfig(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("io-open", "cannot open " + path + " for reading");
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(lineno, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (!schema().count(section)) fail(lineno, "unknown section [" + section + "]");
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) fail(lineno, "expected `key = value`");
      if (section.empty()) fail(lineno, "key before any [section] header");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(lineno, "empty key");
      if (value.empty()) fail(lineno, "empty value for " + key);
      if (!schema().at(section).count(key))
        fail(lineno, "unknown key " + section + "." + key);
      const std::string full = section + "." + key;
      if (items_.count(full)) fail(lineno, "duplicate key " + full);
      items_[full] = RawItem{value, lineno};
    }
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError("parse", path_ + ":" + std::to_string(line) + ": " + msg);
  }

  bool has(const std::string& key) const { return items_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = items_.find(key);
    return it == items_.end() ? fallback : it->second.value;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = items_.find(key);
    if (it == items_.end()) return fallback;
    const char* s = it->second.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') fail(it->second.line, key + " expects a number, got `" + s + "`");
    return v;
  }

  int get_int(const std::string& key, int fallback) const {
    const auto it = items_.find(key);
    if (it == items_.end()) return fallback;
    const char* s = it->second.value.c_str();
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0')
      fail(it->second.line, key + " expects an integer, got `" + s + "`");
    return static_cast<int>(v);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = items_.find(key);
    if (it == items_.end()) return fallback;
    const std::string& v = it->second.value;
    if (v == "true") return true;
    if (v == "false") return false;
    fail(it->second.line, key + " expects true or false, got `" + v + "`");
  }

  EdgeKind get_edge(const std::string& key, EdgeKind fallback) const {
    const auto it = items_.find(key);
    if (it == items_.end()) return fallback;
    const std::string& v = it->second.value;
    if (v == "flux") return EdgeKind::flux;
    if (v == "dirichlet") return EdgeKind::dirichlet;
    fail(it->second.line, key + " expects flux or dirichlet, got `" + v + "`");
  }

 private:
  std::string path_;
  std::map<std::string, RawItem> items_;
};

// Collects every violated rule so one pass reports them all.
class Checker {
 public:
  void require(bool ok, const std::string& problem) {
    if (!ok) problems_.push_back(problem);
  }

  void finish() const {
    if (problems_.empty()) return;
    std::string joined;
    for (std::size_t k = 0; k < problems_.size(); ++k) {
      if (k) joined += "; ";
      joined += problems_[k];
    }
    throw ConfigError("validate", joined);
  }

 private:
  std::vector<std::string> problems_;
};

std::string num(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

CouplingMode ScenarioConfig::mode() const {
  if (macro.coupling == "full") return CouplingMode::full_diffusive;
  return macro.advection ? CouplingMode::partial_advective : CouplingMode::partial_diffusive;
}

std::string default_output_dir() {
  const char* env = std::getenv("POROSCALE_OUT");
  return env && *env ? env : "out";
}

ScenarioConfig parse_config(const std::string& path) {
  RawConfig raw(path);
  ScenarioConfig c;

  c.geometry.shape = raw.get_string("geometry.shape", c.geometry.shape);
  c.geometry.r0 = raw.get_double("geometry.r0", c.geometry.r0);
  c.geometry.r1 = raw.get_double("geometry.r1", c.geometry.r1);
  c.geometry.n = raw.get_int("geometry.n", c.geometry.n);

  c.evolution.vn = raw.get_double("evolution.vn", c.evolution.vn);
  c.evolution.dt = raw.get_double("evolution.dt", c.evolution.dt);
  c.evolution.steps = raw.get_int("evolution.steps", c.evolution.steps);

  c.tables.samples = raw.get_int("tables.samples", c.tables.samples);
  c.tables.with_permeability = raw.get_bool("tables.with_permeability", c.tables.with_permeability);
  c.tables.delta = raw.get_double("tables.delta", c.tables.delta);

  c.macro.nx = raw.get_int("macro.nx", c.macro.nx);
  c.macro.ny = raw.get_int("macro.ny", c.macro.ny);
  c.macro.lx = raw.get_double("macro.lx", c.macro.lx);
  c.macro.ly = raw.get_double("macro.ly", c.macro.ly);
  c.macro.coupling = raw.get_string("macro.coupling", c.macro.coupling);
  c.macro.advection = raw.get_bool("macro.advection", c.macro.advection);
  const char* edge_key[4] = {"macro.left", "macro.right", "macro.bottom", "macro.top"};
  const char* c_key[4] = {"macro.c_left", "macro.c_right", "macro.c_bottom", "macro.c_top"};
  for (int e = 0; e < 4; ++e) {
    c.macro.edge[e] = raw.get_edge(edge_key[e], c.macro.edge[e]);
    c.macro.c_edge[e] = raw.get_double(c_key[e], c.macro.c_edge[e]);
  }
  c.macro.c0 = raw.get_double("macro.c0", c.macro.c0);
  c.macro.phi0 = raw.get_double("macro.phi0", c.macro.phi0);
  c.macro.s0 = raw.get_double("macro.s0", c.macro.s0);
  c.macro.s_rate = raw.get_double("macro.s_rate", c.macro.s_rate);
  c.macro.vn_sign = raw.get_int("macro.vn_sign", c.macro.vn_sign);
  c.macro.T = raw.get_double("macro.T", c.macro.T);
  c.macro.dt = raw.get_double("macro.dt", c.macro.dt);
  c.macro.flux_in = raw.get_double("macro.flux_in", c.macro.flux_in);

  c.output.dir = raw.get_string("output.dir", default_output_dir());
  c.output.vtk = raw.get_bool("output.vtk", c.output.vtk);
  c.output.csv = raw.get_bool("output.csv", c.output.csv);

  Checker check;
  check.require(c.geometry.shape == "circle",
                "geometry.shape: only `circle` is available, got `" + c.geometry.shape + "`");
  check.require(c.geometry.r0 > 0.0 && c.geometry.r0 < 0.5,
                "geometry.r0 must lie in (0, 0.5), got " + num(c.geometry.r0));
  check.require(c.geometry.r1 > 0.0 && c.geometry.r1 < 0.5,
                "geometry.r1 must lie in (0, 0.5), got " + num(c.geometry.r1));
  check.require(c.geometry.n >= 16, "geometry.n must be at least 16, got " + num(c.geometry.n));

  check.require(c.evolution.dt > 0.0, "evolution.dt must be positive, got " + num(c.evolution.dt));
  check.require(c.evolution.steps >= 0,
                "evolution.steps must be nonnegative, got " + num(c.evolution.steps));

  check.require(c.tables.samples >= 2, "tables.samples must be at least 2, got " + num(c.tables.samples));
  check.require(c.tables.delta > 0.0 && c.tables.delta < 0.5,
                "tables.delta must lie in (0, 0.5), got " + num(c.tables.delta));

  check.require(c.macro.nx >= 1 && c.macro.ny >= 1, "macro.nx and macro.ny must be at least 1");
  check.require(c.macro.lx > 0.0 && c.macro.ly > 0.0, "macro.lx and macro.ly must be positive");
  check.require(c.macro.coupling == "partial" || c.macro.coupling == "full",
                "macro.coupling must be partial or full, got `" + c.macro.coupling + "`");
  check.require(!(c.macro.coupling == "full" && c.macro.advection),
                "macro.advection: advective transport with full coupling is an unsupported "
                "combination; drop one of the two");
  check.require(c.macro.vn_sign == 1 || c.macro.vn_sign == -1,
                "macro.vn_sign must be 1 or -1, got " + num(c.macro.vn_sign));
  check.require(c.macro.T >= 0.0, "macro.T must be nonnegative, got " + num(c.macro.T));
  check.require(c.macro.dt > 0.0, "macro.dt must be positive, got " + num(c.macro.dt));
  check.require(std::isfinite(c.macro.c0) && c.macro.c0 >= 0.0,
                "macro.c0 must be a nonnegative concentration, got " + num(c.macro.c0));

  // Downstream preconditions, checked on the analytic circle family so the
  // failure surfaces here with the key that caused it.
  const double r_lo = std::min(c.geometry.r0, c.geometry.r1);
  const double r_hi = std::max(c.geometry.r0, c.geometry.r1);
  const double pi = 3.14159265358979323846;
  const double phi_lo = 1.0 - pi * r_hi * r_hi;
  const double phi_hi = 1.0 - pi * r_lo * r_lo;
  const double d = c.tables.delta;
  if (c.geometry.shape == "circle" && c.tables.delta > 0.0 && c.tables.delta < 0.5) {
    check.require(phi_lo >= d && phi_hi <= 1.0 - d,
                  "geometry.r0/geometry.r1: circle porosity sweep [" + num(phi_lo) + ", " +
                      num(phi_hi) + "] leaves the band [" + num(d) + ", " + num(1.0 - d) +
                      "] set by tables.delta");
    check.require(2.0 * pi * r_lo >= d,
                  "geometry.r1: interface length " + num(2.0 * pi * r_lo) +
                      " falls below tables.delta = " + num(d));
  }

  if (c.macro.coupling == "partial") {
    const double s_end = c.macro.s0 + c.macro.s_rate * c.macro.T;
    const double s_min = std::min(c.macro.s0, s_end);
    const double s_max = std::max(c.macro.s0, s_end);
    const double s_span = r_hi - r_lo;
    check.require(s_min >= 0.0 && s_max <= s_span,
                  "macro.s0/macro.s_rate: prescribed s sweeps [" + num(s_min) + ", " + num(s_max) +
                      "] outside the tabulated range [0, " + num(s_span) + "]");
  } else {
    check.require(c.macro.phi0 >= phi_lo && c.macro.phi0 <= phi_hi,
                  "macro.phi0 = " + num(c.macro.phi0) + " lies outside the tabulated porosity range [" +
                      num(phi_lo) + ", " + num(phi_hi) + "]");
  }

  for (int e = 0; e < 4; ++e)
    if (c.macro.edge[e] == EdgeKind::dirichlet)
      check.require(c.macro.c_edge[e] == c.macro.c0,
                    std::string(c_key[e]) + " = " + num(c.macro.c_edge[e]) +
                        " is incompatible with macro.c0 = " + num(c.macro.c0) +
                        "; the boundary data must match the initial state");

  if (c.macro.advection) {
    check.require(c.tables.with_permeability,
                  "macro.advection requires tables.with_permeability = true");
    const double cells_per_length = std::max(c.macro.nx / c.macro.lx, c.macro.ny / c.macro.ly);
    const double cfl = std::fabs(c.macro.flux_in) * c.macro.dt * cells_per_length;
    check.require(cfl <= 0.9, "macro.flux_in/macro.dt: advective step estimate " + num(cfl) +
                                  " exceeds the bound 0.9; reduce macro.dt");
  }

  check.require(!c.output.dir.empty(), "output.dir must not be empty");

  check.finish();
  return c;
}

}  // namespace poroscale
