#include "poroscale/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "poroscale/errors.hpp"

namespace poroscale {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("io-open", "cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("io-open", "cannot open " + path + " for reading");
  return in;
}

nlohmann::ordered_json tensor_json(const Mat2& m) {
  return nlohmann::ordered_json::array({{m.a11, m.a12}, {m.a21, m.a22}});
}

void write_vtk_header(std::ofstream& out, const MacroGrid& g) {
  out << "# vtk DataFile Version 3.0\n"
      << "poroscale field\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << g.nodes_x() << " " << g.nodes_y() << " 1\n"
      << "ORIGIN 0 0 0\n"
      << "SPACING " << format_double(g.hx()) << " " << format_double(g.hy()) << " 1\n";
}

void write_scalars(std::ofstream& out, const char* name, const std::vector<double>& v) {
  out << "SCALARS " << name << " double 1\n"
      << "LOOKUP_TABLE default\n";
  for (double x : v) out << format_double(x) << "\n";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_levelset(const std::string& path, const LevelSetField& f) {
  std::ofstream out = open_out(path);
  const int m = f.grid.nodes();
  out << "levelset n=" << f.grid.n << " margin=" << format_double(f.grid.margin) << "\n";
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (i) out << " ";
      out << format_double(f(i, j));
    }
    out << "\n";
  }
}

LevelSetField read_levelset(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("io-parse", path + ":1: empty file");
  int n = 0;
  double margin = 0.0;
  if (std::sscanf(line.c_str(), "levelset n=%d margin=%lf", &n, &margin) != 2 || n < 1)
    throw ConfigError("io-parse", path + ":1: expected `levelset n=<n> margin=<m>`");

  LevelSetField f{UnitCellGrid(n, margin)};
  const std::size_t total = f.values.size();
  for (std::size_t k = 0; k < total; ++k)
    if (!(in >> f.values[k]))
      throw ConfigError("io-parse", path + ": expected " + std::to_string(total) +
                                        " values, failed at entry " + std::to_string(k));
  return f;
}

void write_polyline_csv(const std::string& path, const InterfacePolyline& curve) {
  std::ofstream out = open_out(path);
  out << "x,y,component_id\n";
  const std::vector<int> ids = curve.component_ids();
  for (std::size_t k = 0; k < curve.vertices.size(); ++k)
    out << format_double(curve.vertices[k].x) << "," << format_double(curve.vertices[k].y) << ","
        << ids[k] << "\n";
}

void write_cell_summary(const std::string& path, const EffectiveParams& p,
                        const DiffusionCellSolution& diffusion, const StokesCellSolution* stokes) {
  nlohmann::ordered_json j;
  j["phi"] = p.phi;
  j["sigma"] = p.sigma;
  j["D"] = tensor_json(p.D);
  if (stokes) j["K"] = tensor_json(p.K);
  j["residuals"]["diffusion"] = {diffusion.rel_residual[0], diffusion.rel_residual[1]};
  if (stokes) {
    j["residuals"]["stokes_div"] = {stokes->div_max[0], stokes->div_max[1]};
    j["residuals"]["solid_speed"] = stokes->max_solid_speed;
  }
  j["params"]["n"] = diffusion.grid.n;
  j["params"]["eps"] = diffusion.eps;
  if (stokes) j["params"]["eta"] = stokes->eta;

  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_path(const std::string& dir, const EvolvedPath& path) {
  std::filesystem::create_directories(dir);
  std::ofstream index = open_out(dir + "/path_index.txt");
  index << "path samples=" << path.samples() << " tubular_radius=" << format_double(path.tubular_radius)
        << " z_drift=" << format_double(path.z_drift) << "\n";
  for (int k = 0; k < path.samples(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%03d.lvl", k);
    write_levelset(dir + "/" + name, path.fields[static_cast<std::size_t>(k)]);
    index << format_double(path.times[static_cast<std::size_t>(k)]) << " " << name << "\n";
  }
}

namespace {

void write_table_rows(std::ofstream& out, const ParameterTable& t, const std::vector<int>& order,
                      bool phi_first) {
  out << (phi_first ? "phi,s" : "s,phi") << ",sigma,D11,D12,D22,K11,K12,K22\n";
  for (int k : order) {
    const EffectiveParams p = t.sample(k);
    const Mat2 K = p.has_K ? p.K : Mat2{0.0, 0.0, 0.0, 0.0};
    const double first = phi_first ? p.phi : p.s;
    const double second = phi_first ? p.s : p.phi;
    out << format_double(first) << "," << format_double(second) << "," << format_double(p.sigma) << ","
        << format_double(p.D.a11) << "," << format_double(p.D.a12) << "," << format_double(p.D.a22)
        << "," << format_double(K.a11) << "," << format_double(K.a12) << "," << format_double(K.a22)
        << "\n";
  }
}

}  // namespace

void write_table_csv(const std::string& path, const ParameterTable& t) {
  std::ofstream out = open_out(path);
  std::vector<int> order(static_cast<std::size_t>(t.size()));
  std::iota(order.begin(), order.end(), 0);
  write_table_rows(out, t, order, false);
}

void write_phi_table_csv(const std::string& path, const ParameterTable& t) {
  std::ofstream out = open_out(path);
  std::vector<int> order(static_cast<std::size_t>(t.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return t.phi()[static_cast<std::size_t>(a)] < t.phi()[static_cast<std::size_t>(b)];
  });
  write_table_rows(out, t, order, true);
}

void write_darcy_vtk(const std::string& path, const DarcyField& f) {
  std::ofstream out = open_out(path);
  write_vtk_header(out, f.grid);
  out << "POINT_DATA " << f.grid.nodes() << "\n";
  write_scalars(out, "pressure", f.p);
  out << "CELL_DATA " << f.grid.cells() << "\n"
      << "VECTORS velocity double\n";
  for (const Vec2& v : f.v) out << format_double(v.x) << " " << format_double(v.y) << " 0\n";
}

void write_darcy_norms_csv(const std::string& path, const DarcySlices& s) {
  std::ofstream out = open_out(path);
  out << "slice,p_l2,v_l2,mass_balance,v_diff_l2\n";
  for (std::size_t k = 0; k < s.slices.size(); ++k) {
    const DarcyField& f = s.slices[k];
    const double area = f.grid.hx() * f.grid.hy();
    double p2 = 0.0;
    for (int j = 0; j <= f.grid.ny; ++j)
      for (int i = 0; i <= f.grid.nx; ++i) {
        const double w = ((i == 0 || i == f.grid.nx) ? 0.5 : 1.0) * ((j == 0 || j == f.grid.ny) ? 0.5 : 1.0);
        const double v = f.p[static_cast<std::size_t>(f.grid.node_index(i, j))];
        p2 += w * area * v * v;
      }
    double v2 = 0.0;
    for (const Vec2& v : f.v) v2 += area * norm_sq(v);
    out << k << "," << format_double(std::sqrt(p2)) << "," << format_double(std::sqrt(v2)) << ","
        << format_double(f.mass_balance) << ",";
    if (k < s.v_diff_l2.size()) out << format_double(s.v_diff_l2[k]);
    out << "\n";
  }
}

void write_state_vtk(const std::string& path, const MacroGrid& g, const TransportState& st) {
  std::ofstream out = open_out(path);
  write_vtk_header(out, g);
  out << "POINT_DATA " << g.nodes() << "\n";
  write_scalars(out, "c", st.c);
  write_scalars(out, "phi", st.phi);
}

void write_diagnostics_csv(const std::string& path, const std::vector<StepDiagnostics>& d) {
  std::ofstream out = open_out(path);
  out << "t,mass_fluid,mass_solid,mass_total,phi_min,phi_max,picard_iters\n";
  for (const StepDiagnostics& s : d)
    out << format_double(s.t) << "," << format_double(s.mass_fluid) << "," << format_double(s.mass_solid)
        << "," << format_double(s.mass_total) << "," << format_double(s.phi_min) << ","
        << format_double(s.phi_max) << "," << s.picard_iters << "\n";
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (true) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    if (got <= 0) break;
    for (std::streamsize i = 0; i < got; ++i)
      h = (h ^ static_cast<unsigned char>(buf[i])) * 1099511628211ull;
  }
  return h;
}

void Manifest::add(const std::string& dir, const std::string& name) {
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016" PRIx64, fnv1a_file(dir + "/" + name));
  entries_.emplace_back(name, hex);
}

void Manifest::write(const std::string& path) const {
  std::vector<std::pair<std::string, std::string>> sorted = entries_;
  std::sort(sorted.begin(), sorted.end());
  std::ofstream out = open_out(path);
  for (const auto& e : sorted) out << e.second << "  " << e.first << "\n";
}

}  // namespace poroscale
