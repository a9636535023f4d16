#pragma once

// Scenario files are flat INI: `key = value` lines under `[section]`
// headers, `#` or `;` comments, every key optional with a documented
// default. parse_config rejects malformed lines, unknown or duplicate
// keys with the line number, then validates the cross-field rules of the
// downstream solvers all at once, naming each offending key.

#include <array>
#include <string>

#include "poroscale/darcy.hpp"
#include "poroscale/transport.hpp"

namespace poroscale {

struct GeometryConfig {
  std::string shape = "circle";
  double r0 = 0.3;  // launch radius
  double r1 = 0.2;  // target radius, may equal r0
  int n = 64;       // unit-cell resolution
};

struct EvolutionConfig {
  double vn = 1.0;  // normal speed amplitude
  double dt = 0.01;
  int steps = 0;  // 0: tables use the analytic radius path instead
};

struct TablesConfig {
  int samples = 9;
  bool with_permeability = false;
  double delta = 0.05;  // non-degeneracy band half-width
};

struct MacroConfig {
  int nx = 16, ny = 16;
  double lx = 1.0, ly = 1.0;
  std::string coupling = "partial";  // partial | full
  bool advection = false;
  std::array<EdgeKind, 4> edge{EdgeKind::flux, EdgeKind::dirichlet, EdgeKind::flux, EdgeKind::flux};
  std::array<double, 4> c_edge{0.0, 0.0, 0.0, 0.0};  // Dirichlet concentration per edge
  double c0 = 0.0;                                   // initial concentration
  double phi0 = 0.8;                                 // initial porosity (full coupling)
  double s0 = 0.0, s_rate = 1.0;                     // prescribed s(t) = s0 + s_rate t
  int vn_sign = 1;                                   // +1 precipitation, -1 dissolution
  double T = 0.05;
  double dt = 1e-3;
  double flux_in = 1.0;  // inward Darcy flux on the left edge (advective mode)
};

struct OutputConfig {
  std::string dir;  // resolved at parse time; see default_output_dir
  bool vtk = true;
  bool csv = true;
};

struct ScenarioConfig {
  GeometryConfig geometry;
  EvolutionConfig evolution;
  TablesConfig tables;
  MacroConfig macro;
  OutputConfig output;

  CouplingMode mode() const;
};

// POROSCALE_OUT when set, else "out". A `dir` key in [output] wins over
// the environment; the CLI --out flag wins over both.
std::string default_output_dir();

ScenarioConfig parse_config(const std::string& path);

}  // namespace poroscale
