#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "poroscale/darcy.hpp"
#include "poroscale/errors.hpp"
#include "poroscale/geometry.hpp"
#include "poroscale/interface_curve.hpp"
#include "poroscale/io.hpp"
#include "poroscale/tables.hpp"
#include "poroscale/transport.hpp"

using namespace poroscale;

namespace {

std::string tmp_dir() {
  static std::string dir = [] {
    std::string d = (std::filesystem::temp_directory_path() / "poroscale_io_test").string();
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

// Oracle for fnv1a_file: the reference fold, restated from scratch.
std::uint64_t fnv1a_bytes(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ParameterTable tiny_table(bool with_K) {
  std::vector<double> s{0.0, 0.1, 0.2};
  std::vector<double> phi{0.6, 0.7, 0.8};
  std::vector<double> sigma{1.5, 1.25, 1.0};
  std::vector<Mat2> D{Mat2{0.4, 0.01, 0.01, 0.41}, Mat2{0.5, 0.0, 0.0, 0.5},
                      Mat2{0.6, -0.02, -0.02, 0.59}};
  std::vector<Mat2> K;
  if (with_K) K = {Mat2{1e-3, 0, 0, 1e-3}, Mat2{2e-3, 0, 0, 2e-3}, Mat2{3e-3, 0, 0, 3e-3}};
  return ParameterTable(s, phi, sigma, D, K, 0.05);
}

}  // namespace

TEST_CASE("doubles print with full precision and round trip") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-0.0) == "-0");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 1e-308, 3.141592653589793, -7.25e-9}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("level sets round trip bitwise through their text form") {
  UnitCellGrid g(17);
  LevelSetField f = circle_levelset(0.31, g);
  const std::string path = tmp_dir() + "/round.lvl";
  write_levelset(path, f);

  CHECK(first_line(slurp(path)) == "levelset n=17 margin=" + format_double(g.margin));

  LevelSetField back = read_levelset(path);
  REQUIRE(back.grid == f.grid);
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(back.values[k] == f.values[k]);

  const std::string again = tmp_dir() + "/round2.lvl";
  write_levelset(again, back);
  CHECK(slurp(again) == slurp(path));
}

TEST_CASE("malformed level-set files are configuration errors") {
  const std::string bad = tmp_dir() + "/bad.lvl";

  { std::ofstream(bad) << "levelset n=oops\n"; }
  CHECK_THROWS_AS(read_levelset(bad), ConfigError);

  { std::ofstream(bad) << "levelset n=16 margin=0.25\n1 2 3\n"; }
  CHECK_THROWS_AS(read_levelset(bad), ConfigError);

  CHECK_THROWS_AS(read_levelset(tmp_dir() + "/no_such_file.lvl"), ConfigError);

  try {
    read_levelset(bad);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.code()) == "io-parse");
    CHECK(std::string(e.what()).find("entry") != std::string::npos);
  }
}

TEST_CASE("interface polylines export as vertex rows with component ids") {
  UnitCellGrid g(24);
  LevelSetField f = circle_levelset(0.3, g);
  InterfacePolyline curve = extract_interface(f);
  REQUIRE(!curve.empty());

  const std::string path = tmp_dir() + "/curve.csv";
  write_polyline_csv(path, curve);
  const std::string text = slurp(path);
  CHECK(first_line(text) == "x,y,component_id");

  std::size_t rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == curve.vertices.size() + 1);
  CHECK(text.find(",0\n") != std::string::npos);
}

TEST_CASE("table files carry every sample at full precision") {
  ParameterTable t = tiny_table(true);
  const std::string path = tmp_dir() + "/table.csv";
  write_table_csv(path, t);
  const std::string text = slurp(path);
  CHECK(first_line(text) == "s,phi,sigma,D11,D12,D22,K11,K12,K22");

  std::istringstream rows(text);
  std::string line;
  std::getline(rows, line);
  for (int k = 0; k < t.size(); ++k) {
    REQUIRE(std::getline(rows, line));
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> got;
    while (std::getline(cells, cell, ',')) got.push_back(std::strtod(cell.c_str(), nullptr));
    REQUIRE(got.size() == 9);
    const EffectiveParams p = t.sample(k);
    CHECK(got[0] == p.s);
    CHECK(got[1] == p.phi);
    CHECK(got[2] == p.sigma);
    CHECK(got[3] == p.D.a11);
    CHECK(got[4] == p.D.a12);
    CHECK(got[5] == p.D.a22);
    CHECK(got[6] == p.K.a11);
    CHECK(got[8] == p.K.a22);
  }
  CHECK(!std::getline(rows, line));
}

TEST_CASE("tables without permeability write zero K columns") {
  ParameterTable t = tiny_table(false);
  const std::string path = tmp_dir() + "/table_nok.csv";
  write_table_csv(path, t);
  std::istringstream rows(slurp(path));
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    CHECK(line.size() >= 6);
    CHECK(line.substr(line.size() - 6) == ",0,0,0");
  }
}

TEST_CASE("the porosity-ordered table leads with an increasing phi column") {
  ParameterTable t = tiny_table(true);
  const std::string path = tmp_dir() + "/table_phi.csv";
  write_phi_table_csv(path, t);
  std::istringstream rows(slurp(path));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "phi,s,sigma,D11,D12,D22,K11,K12,K22");
  double prev = -1.0;
  int count = 0;
  while (std::getline(rows, line)) {
    const double phi = std::strtod(line.c_str(), nullptr);
    CHECK(phi > prev);
    prev = phi;
    ++count;
  }
  CHECK(count == t.size());
}

TEST_CASE("darcy fields serialize as structured-point data sets") {
  MacroGrid g(4, 3);
  std::vector<Mat2> K(static_cast<std::size_t>(g.cells()), Mat2{1, 0, 0, 1});
  DarcyData data;
  data.g_flux[0] = 1.0;
  DarcyField f = solve_darcy(g, K, data);

  const std::string path = tmp_dir() + "/darcy.vtk";
  write_darcy_vtk(path, f);
  const std::string text = slurp(path);
  CHECK(first_line(text) == "# vtk DataFile Version 3.0");
  CHECK(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  CHECK(text.find("DIMENSIONS 5 4 1") != std::string::npos);
  CHECK(text.find("POINT_DATA 20") != std::string::npos);
  CHECK(text.find("SCALARS pressure double 1") != std::string::npos);
  CHECK(text.find("CELL_DATA 12") != std::string::npos);
  CHECK(text.find("VECTORS velocity double") != std::string::npos);

  std::size_t rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 10 + static_cast<std::size_t>(g.nodes()) + 2 + static_cast<std::size_t>(g.cells()));
}

TEST_CASE("slice norm files pair consecutive velocity differences") {
  MacroGrid g(4, 4);
  std::vector<std::vector<Mat2>> Kts;
  for (int step = 0; step < 3; ++step)
    Kts.emplace_back(static_cast<std::size_t>(g.cells()),
                     Mat2{1.0 + 0.1 * step, 0, 0, 1.0 + 0.1 * step});
  DarcyData data;
  data.g_flux[0] = 1.0;
  DarcySlices s = darcy_time_slices(g, Kts, data);

  const std::string path = tmp_dir() + "/norms.csv";
  write_darcy_norms_csv(path, s);
  std::istringstream rows(slurp(path));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "slice,p_l2,v_l2,mass_balance,v_diff_l2");
  std::vector<std::string> body;
  while (std::getline(rows, line)) body.push_back(line);
  REQUIRE(body.size() == 3);
  CHECK(body[0].back() != ',');
  CHECK(body[1].back() != ',');
  CHECK(body[2].back() == ',');  // no successor to diff against
  CHECK(body[0].substr(0, 2) == "0,");
  CHECK(body[2].substr(0, 2) == "2,");
}

TEST_CASE("transport states and diagnostics land in fixed columns") {
  MacroGrid g(3, 2);
  TransportState st;
  st.c.assign(static_cast<std::size_t>(g.nodes()), 0.25);
  st.phi.assign(static_cast<std::size_t>(g.nodes()), 0.7);
  const std::string vtk = tmp_dir() + "/state.vtk";
  write_state_vtk(vtk, g, st);
  const std::string text = slurp(vtk);
  CHECK(text.find("SCALARS c double 1") != std::string::npos);
  CHECK(text.find("SCALARS phi double 1") != std::string::npos);
  CHECK(text.find("POINT_DATA 12") != std::string::npos);

  std::vector<StepDiagnostics> diag(2);
  diag[0].t = 0.0;
  diag[0].mass_fluid = 0.175;
  diag[0].mass_solid = 0.3;
  diag[0].mass_total = 0.475;
  diag[0].phi_min = diag[0].phi_max = 0.7;
  diag[1] = diag[0];
  diag[1].t = 0.01;
  diag[1].picard_iters = 4;
  const std::string csv = tmp_dir() + "/diag.csv";
  write_diagnostics_csv(csv, diag);
  std::istringstream rows(slurp(csv));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "t,mass_fluid,mass_solid,mass_total,phi_min,phi_max,picard_iters");
  std::getline(rows, line);
  CHECK(line == "0,0.17499999999999999,0.29999999999999999,0.47499999999999998,"
                "0.69999999999999996,0.69999999999999996,0");
  std::getline(rows, line);
  CHECK(line.substr(0, 5) == "0.01,");
  CHECK(line.back() == '4');
}

TEST_CASE("file hashes match the reference fold and manifests sort by name") {
  const std::string a = tmp_dir() + "/hash_a.txt";
  const std::string b = tmp_dir() + "/hash_b.txt";
  { std::ofstream(a, std::ios::binary) << "hello\n"; }
  { std::ofstream(b, std::ios::binary) << "poroscale artifact\n"; }

  CHECK(fnv1a_file(a) == fnv1a_bytes("hello\n"));
  CHECK(fnv1a_file(b) == fnv1a_bytes("poroscale artifact\n"));
  CHECK(fnv1a_bytes("") == 14695981039346656037ull);

  Manifest m;
  m.add(tmp_dir(), "hash_b.txt");
  m.add(tmp_dir(), "hash_a.txt");
  const std::string path = tmp_dir() + "/MANIFEST.txt";
  m.write(path);

  std::istringstream rows(slurp(path));
  std::string line;
  std::getline(rows, line);
  CHECK(line.size() == 16 + 2 + 10);
  CHECK(line.substr(18) == "hash_a.txt");
  char expect[17];
  std::snprintf(expect, sizeof expect, "%016llx",
                static_cast<unsigned long long>(fnv1a_bytes("hello\n")));
  CHECK(line.substr(0, 16) == expect);
  std::getline(rows, line);
  CHECK(line.substr(18) == "hash_b.txt");
  CHECK(!std::getline(rows, line));

  m.write(path);
  const std::string once = slurp(path);
  m.write(path);
  CHECK(slurp(path) == once);
}

TEST_CASE("cell summaries expose the effective parameters as a json record") {
  UnitCellGrid g(16);
  LevelSetField f = circle_levelset(0.3, g);
  DiffusionCellSolution d = solve_diffusion_cell(f);
  EffectiveParams p;
  p.s = 0.0;
  p.phi = d.phi;
  p.sigma = surface_area(f);
  p.D = d.D.m;

  const std::string path = tmp_dir() + "/cell.json";
  write_cell_summary(path, p, d, nullptr);
  const std::string text = slurp(path);
  CHECK(first_line(text) == "{");
  CHECK(text.find("\"phi\"") != std::string::npos);
  CHECK(text.find("\"sigma\"") != std::string::npos);
  CHECK(text.find("\"D\"") != std::string::npos);
  CHECK(text.find("\"K\"") == std::string::npos);
  CHECK(text.find("\"residuals\"") != std::string::npos);
  CHECK(text.find("\"params\"") != std::string::npos);
  CHECK(text.find("\"eps\"") != std::string::npos);

  write_cell_summary(path, p, d, nullptr);
  CHECK(slurp(path) == text);
}

TEST_CASE("evolution paths unpack into a directory of samples") {
  UnitCellGrid g(64);
  LevelSetField phi0 = circle_levelset(0.3, g);
  EvolvedPath path = evolve(phi0, uniform_speed(phi0, 1.0), 0.01, 3);

  const std::string dir = tmp_dir() + "/path_out";
  std::filesystem::remove_all(dir);
  write_path(dir, path);

  const std::string index = slurp(dir + "/path_index.txt");
  CHECK(first_line(index).find("path samples=4") == 0);
  CHECK(first_line(index).find("tubular_radius=") != std::string::npos);
  for (int k = 0; k < 4; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%03d.lvl", k);
    CHECK(std::filesystem::exists(dir + "/" + name));
    CHECK(index.find(name) != std::string::npos);
    LevelSetField back = read_levelset(dir + "/" + name);
    CHECK(back.values == path.fields[static_cast<std::size_t>(k)].values);
  }
}
