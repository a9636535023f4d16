// Command-line front end: scenario configs in, artifact directories out.
// Every artifact directory ends with MANIFEST.txt listing the files written
// with their content hashes, so reruns can be compared at a glance.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poroscale/cell_diffusion.hpp"
#include "poroscale/cell_stokes.hpp"
#include "poroscale/config.hpp"
#include "poroscale/darcy.hpp"
#include "poroscale/diffeo.hpp"
#include "poroscale/errors.hpp"
#include "poroscale/evolution.hpp"
#include "poroscale/geometry.hpp"
#include "poroscale/interface_curve.hpp"
#include "poroscale/io.hpp"
#include "poroscale/parallel.hpp"
#include "poroscale/tables.hpp"
#include "poroscale/transport.hpp"
#include "poroscale/verify.hpp"

namespace {

using namespace poroscale;

struct Invocation {
  std::string command;
  ScenarioConfig cfg;
  std::string out;
  long seed = -1;  // echoed into summaries when nonnegative
};

nlohmann::ordered_json tensor_json(const Mat2& m) {
  return nlohmann::ordered_json::array({{m.a11, m.a12}, {m.a21, m.a22}});
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("io-open", "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

TableOptions table_options(const ScenarioConfig& cfg) {
  TableOptions opt;
  opt.n = cfg.geometry.n;
  opt.samples = cfg.tables.samples;
  opt.with_K = cfg.tables.with_permeability;
  opt.delta = cfg.tables.delta;
  return opt;
}

// Evolve-based path when [evolution] asks for steps, else the analytic
// radius sweep. The evolved route also drops the level-set samples.
ParameterTable build_scenario_table(const Invocation& in, Manifest* manifest) {
  const ScenarioConfig& cfg = in.cfg;
  if (cfg.evolution.steps > 0) {
    UnitCellGrid g(cfg.geometry.n);
    const LevelSetField phi0 = circle_levelset(cfg.geometry.r0, g);
    const EvolvedPath path =
        evolve(phi0, uniform_speed(phi0, cfg.evolution.vn), cfg.evolution.dt, cfg.evolution.steps);
    if (manifest) {
      write_path(in.out + "/path", path);
      manifest->add(in.out, "path/path_index.txt");
      for (int k = 0; k < path.samples(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "path/sample_%03d.lvl", k);
        manifest->add(in.out, name);
      }
    }
    return build_table(path, table_options(cfg));
  }
  return build_table(circle_radius_path(cfg.geometry.r0, cfg.geometry.r1), table_options(cfg));
}

int cmd_cell(const Invocation& in) {
  const ScenarioConfig& cfg = in.cfg;
  UnitCellGrid g(cfg.geometry.n);
  const LevelSetField field = circle_levelset(cfg.geometry.r0, g);
  const DiffusionCellSolution diffusion = solve_diffusion_cell(field);
  const InterfacePolyline curve = extract_interface(field);

  EffectiveParams p;
  p.phi = diffusion.phi;
  p.sigma = surface_area(field);
  p.D = diffusion.D.m;
  StokesCellSolution stokes;
  const StokesCellSolution* stokes_ptr = nullptr;
  if (cfg.tables.with_permeability) {
    stokes = solve_stokes_cell(field);
    p.K = stokes.K.m;
    p.has_K = true;
    stokes_ptr = &stokes;
  }

  Manifest manifest;
  write_levelset(in.out + "/cell_levelset.lvl", field);
  manifest.add(in.out, "cell_levelset.lvl");
  if (cfg.output.csv) {
    write_polyline_csv(in.out + "/cell_interface.csv", curve);
    manifest.add(in.out, "cell_interface.csv");
  }
  write_cell_summary(in.out + "/cell_summary.json", p, diffusion, stokes_ptr);
  manifest.add(in.out, "cell_summary.json");
  manifest.write(in.out + "/MANIFEST.txt");

  std::printf("cell r=%s: phi %s, sigma %s, D11 %s, D12 %s\n", format_double(cfg.geometry.r0).c_str(),
              format_double(p.phi).c_str(), format_double(p.sigma).c_str(),
              format_double(p.D.a11).c_str(), format_double(p.D.a12).c_str());
  return 0;
}

int cmd_table(const Invocation& in) {
  Manifest manifest;
  const ParameterTable table = build_scenario_table(in, &manifest);

  write_table_csv(in.out + "/table_s.csv", table);
  manifest.add(in.out, "table_s.csv");
  write_phi_table_csv(in.out + "/table_phi.csv", table);
  manifest.add(in.out, "table_phi.csv");
  manifest.write(in.out + "/MANIFEST.txt");

  std::printf("table: %d samples, s in [%s, %s], phi in [%s, %s]%s\n", table.size(),
              format_double(table.s().front()).c_str(), format_double(table.s().back()).c_str(),
              format_double(table.phi().front()).c_str(), format_double(table.phi().back()).c_str(),
              table.has_K() ? ", with permeability" : "");
  return 0;
}

int cmd_darcy(const Invocation& in) {
  const ScenarioConfig& cfg = in.cfg;
  if (!cfg.tables.with_permeability)
    throw ConfigError("darcy-config", "the darcy command needs tables.with_permeability = true");

  Manifest manifest;
  const ParameterTable table = build_scenario_table(in, &manifest);

  MacroGrid grid(cfg.macro.nx, cfg.macro.ny, cfg.macro.lx, cfg.macro.ly);
  DarcyData data;
  data.g_flux[0] = cfg.macro.flux_in;

  std::vector<std::vector<Mat2>> Kts;
  for (int k = 0; k < table.size(); ++k)
    Kts.emplace_back(static_cast<std::size_t>(grid.cells()), table.sample(k).K);
  const DarcySlices slices = darcy_time_slices(grid, Kts, data);

  if (cfg.output.vtk)
    for (std::size_t k = 0; k < slices.slices.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "darcy_slice_%03d.vtk", static_cast<int>(k));
      write_darcy_vtk(in.out + "/" + name, slices.slices[k]);
      manifest.add(in.out, name);
    }
  if (cfg.output.csv) {
    write_darcy_norms_csv(in.out + "/darcy_norms.csv", slices);
    manifest.add(in.out, "darcy_norms.csv");
  }

  const ContinuityReport cont = continuity_experiment(grid, Kts.front(), Kts.back(), data);
  nlohmann::ordered_json j;
  j["slices"] = slices.slices.size();
  j["continuity"]["dk_linf"] = cont.dk_linf;
  j["continuity"]["dp_h1"] = cont.dp_h1;
  j["continuity"]["dv_l2"] = cont.dv_l2;
  j["continuity"]["dv_linf"] = cont.dv_linf;
  j["continuity"]["ratio_l2"] = cont.ratio_l2;
  j["continuity"]["ratio_linf"] = cont.ratio_linf;
  write_json(in.out + "/darcy_summary.json", j);
  manifest.add(in.out, "darcy_summary.json");
  manifest.write(in.out + "/MANIFEST.txt");

  std::printf("darcy: %d slices, velocity response ratio %s\n", static_cast<int>(slices.slices.size()),
              format_double(cont.ratio_l2).c_str());
  return 0;
}

int cmd_transport(const Invocation& in) {
  const ScenarioConfig& cfg = in.cfg;
  Manifest manifest;
  const ParameterTable table = build_scenario_table(in, &manifest);

  MacroGrid grid(cfg.macro.nx, cfg.macro.ny, cfg.macro.lx, cfg.macro.ly);
  grid.boundary = cfg.macro.edge;

  RunSetup setup;
  setup.mode = cfg.mode();
  const double s0 = cfg.macro.s0, s_rate = cfg.macro.s_rate;
  setup.s_field = [s0, s_rate](double t, Vec2) { return s0 + s_rate * t; };
  setup.table = &table;
  std::optional<PhiTable> phi_table;
  if (setup.mode == CouplingMode::full_diffusive) {
    phi_table.emplace(table);
    setup.phi_table = &*phi_table;
  }
  setup.rate = linear_rate();
  setup.bc.c_dir = cfg.macro.c_edge;
  setup.darcy_data.g_flux[0] = cfg.macro.flux_in;
  setup.T = cfg.macro.T;
  setup.dt = cfg.macro.dt;
  setup.opt.vn_sign = cfg.macro.vn_sign;

  TransportState init;
  init.c.assign(static_cast<std::size_t>(grid.nodes()), cfg.macro.c0);
  const double phi_init =
      setup.mode == CouplingMode::full_diffusive ? cfg.macro.phi0 : table.phi_at(s0);
  init.phi.assign(static_cast<std::size_t>(grid.nodes()), phi_init);

  const RunResult run = run_transport(grid, init, setup);

  if (cfg.output.vtk)
    for (std::size_t k = 0; k < run.trajectory.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "state_%04d.vtk", static_cast<int>(k));
      write_state_vtk(in.out + "/" + name, grid, run.trajectory[k]);
      manifest.add(in.out, name);
    }
  if (cfg.output.csv) {
    write_diagnostics_csv(in.out + "/diagnostics.csv", run.diagnostics);
    manifest.add(in.out, "diagnostics.csv");
  }

  nlohmann::ordered_json j;
  j["mode"] = cfg.macro.coupling + (cfg.macro.advection ? "+advective" : "");
  j["states"] = run.trajectory.size();
  j["final_t"] = run.trajectory.back().t;
  j["mass_initial"] = run.diagnostics.front().mass_total;
  j["mass_final"] = run.diagnostics.back().mass_total;
  j["hit_horizon"] = run.hit_horizon;
  if (run.hit_horizon) {
    j["horizon_t"] = run.horizon_t;
    j["horizon_reason"] = run.horizon_reason;
  }
  if (in.seed >= 0) j["seed"] = in.seed;
  write_json(in.out + "/transport_summary.json", j);
  manifest.add(in.out, "transport_summary.json");
  manifest.write(in.out + "/MANIFEST.txt");

  std::printf("transport: %d states to t=%s, total mass %s -> %s\n",
              static_cast<int>(run.trajectory.size()), format_double(run.trajectory.back().t).c_str(),
              format_double(run.diagnostics.front().mass_total).c_str(),
              format_double(run.diagnostics.back().mass_total).c_str());
  if (run.hit_horizon) {
    std::fprintf(stderr, "poroscale: error 2: %s\n", run.horizon_reason.c_str());
    return 2;
  }
  return 0;
}

int cmd_verify(const Invocation& in) {
  std::vector<CriterionResult> results = run_acceptance();
  const std::vector<CriterionResult> rerun = run_acceptance();
  const std::string first = acceptance_report(results);
  const bool identical = first == acceptance_report(rerun);

  CriterionResult determinism;
  determinism.index = 12;
  determinism.name = "determinism";
  determinism.pass = identical;
  determinism.detail = identical ? "two consecutive suite executions rendered byte-identical reports"
                                 : "consecutive executions disagree";
  results.push_back(determinism);

  const std::string report = acceptance_report(results);
  std::ofstream out(in.out + "/verify_report.txt", std::ios::binary);
  if (!out) throw ConfigError("io-open", "cannot open the report file for writing");
  out << report;
  out.close();

  Manifest manifest;
  manifest.add(in.out, "verify_report.txt");
  manifest.write(in.out + "/MANIFEST.txt");

  std::printf("%s", report.c_str());
  std::printf("-- wall time per criterion (not part of the report)\n");
  double total = 0.0;
  for (const CriterionResult& r : results) {
    std::printf("   [%2d] %.2fs\n", r.index, r.seconds);
    total += r.seconds;
  }
  std::printf("   total %.2fs\n", total);

  for (const CriterionResult& r : results)
    if (!r.pass) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poroscale: two-scale reactive transport in an evolving porous medium"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  int threads = 0;
  long seed = -1;

  const char* names[5] = {"cell", "table", "darcy", "transport", "verify"};
  const char* blurbs[5] = {"effective parameters of one geometry",
                           "parameter table along the geometry path",
                           "pressure slices and the continuity experiment",
                           "coupled macroscopic run", "acceptance suite"};
  for (int k = 0; k < 5; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], blurbs[k]);
    sub->add_option("--config", config_path, "scenario file")->required();
    sub->add_option("--out", out_override, "output directory (wins over [output] dir)");
    sub->add_option("--threads", threads, "worker threads, 0 keeps the runtime default");
    sub->add_option("--seed", seed, "run label echoed into the summary");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Invocation in;
    in.command = app.get_subcommands().front()->get_name();
    in.cfg = poroscale::parse_config(config_path);
    in.out = out_override.empty() ? in.cfg.output.dir : out_override;
    in.seed = seed;
    if (threads > 0) poroscale::set_thread_count(threads);
    std::filesystem::create_directories(in.out);

    if (in.command == "cell") return cmd_cell(in);
    if (in.command == "table") return cmd_table(in);
    if (in.command == "darcy") return cmd_darcy(in);
    if (in.command == "transport") return cmd_transport(in);
    return cmd_verify(in);
  } catch (const poroscale::Error& e) {
    std::fprintf(stderr, "poroscale: error %d: %s\n", e.exit_code(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "poroscale: error 3: internal: %s\n", e.what());
    return 3;
  }
}
