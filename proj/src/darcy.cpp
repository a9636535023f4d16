#include "poroscale/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"
#include "q1_stencil.hpp"

namespace poroscale {

namespace {

// Load vector: cellwise-constant sources plus inward-flux edge terms; each
// boundary segment of length h adds g h / 2 to its endpoint nodes.
std::vector<double> load_vector(const MacroGrid& g, const DarcyData& data) {
  std::vector<double> b(static_cast<std::size_t>(g.nodes()), 0.0);
  const double hx = g.hx(), hy = g.hy();

  if (!data.f.empty()) {
    const double jac = 0.25 * hx * hy;
    for (int cj = 0; cj < g.ny; ++cj)
      for (int ci = 0; ci < g.nx; ++ci) {
        const double fc = data.f[static_cast<std::size_t>(g.cell_index(ci, cj))] * jac;
        b[static_cast<std::size_t>(g.node_index(ci, cj))] += fc;
        b[static_cast<std::size_t>(g.node_index(ci + 1, cj))] += fc;
        b[static_cast<std::size_t>(g.node_index(ci + 1, cj + 1))] += fc;
        b[static_cast<std::size_t>(g.node_index(ci, cj + 1))] += fc;
      }
  }

  const auto add_edge = [&](int edge, int count, auto node_at, double h) {
    if (g.boundary[static_cast<std::size_t>(edge)] != EdgeKind::flux) return;
    const double w = data.g_flux[static_cast<std::size_t>(edge)] * 0.5 * h;
    if (w == 0.0) return;
    for (int s = 0; s < count; ++s) {
      b[static_cast<std::size_t>(node_at(s))] += w;
      b[static_cast<std::size_t>(node_at(s + 1))] += w;
    }
  };
  add_edge(0, g.ny, [&](int s) { return g.node_index(0, s); }, hy);
  add_edge(1, g.ny, [&](int s) { return g.node_index(g.nx, s); }, hy);
  add_edge(2, g.nx, [&](int s) { return g.node_index(s, 0); }, hx);
  add_edge(3, g.nx, [&](int s) { return g.node_index(s, g.ny); }, hx);
  return b;
}

}  // namespace

MacroGrid::MacroGrid(int nx_, int ny_, double Lx_, double Ly_) : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
  if (nx < 1 || ny < 1) throw ConfigError("macro-grid", "need at least one cell per axis");
  if (!(Lx > 0.0) || !(Ly > 0.0)) throw ConfigError("macro-grid", "domain lengths must be positive");
}

bool MacroGrid::has_dirichlet() const {
  for (const EdgeKind e : boundary)
    if (e == EdgeKind::dirichlet) return true;
  return false;
}

DarcyField solve_darcy(const MacroGrid& grid, const std::vector<Mat2>& Kfield, const DarcyData& data,
                       const DarcyOptions& opt) {
  if (!grid.has_dirichlet())
    throw ConfigError("macro-grid", "at least one Dirichlet edge is required");
  if (static_cast<int>(Kfield.size()) != grid.cells())
    throw ConfigError("darcy-data", "permeability field size does not match the grid");
  if (!data.f.empty() && static_cast<int>(data.f.size()) != grid.cells())
    throw ConfigError("darcy-data", "source field size does not match the grid");

  DarcyField out;
  out.grid = grid;
  out.Kfield = Kfield;
  out.lambda = 1e300;
  for (const Mat2& K : Kfield) {
    double lo, hi;
    sym_eigenvalues(K, lo, hi);
    out.lambda = std::min(out.lambda, lo);
    out.K_max = std::max(out.K_max, hi);
  }
  if (!(out.lambda > 0.0))
    throw DegeneracyError("non-coercive",
                          "permeability min eigenvalue " + std::to_string(out.lambda) + " is not positive");

  const std::vector<q1::Stencil> A0 = q1::stiffness(grid, Kfield);
  const std::vector<double> b0 = load_vector(grid, data);

  std::vector<char> dir_mask;
  std::vector<double> dir_value;
  q1::tag_dirichlet(grid, data.p_dir, dir_mask, dir_value);

  std::vector<q1::Stencil> A = A0;
  std::vector<double> b = b0;
  q1::eliminate_dirichlet(grid, A, b, dir_mask, dir_value);

  const std::size_t n = static_cast<std::size_t>(grid.nodes());
  std::vector<double> p(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    if (dir_mask[k]) p[k] = dir_value[k];

  const q1::CgResult cg = q1::jacobi_cg(grid, A, b, p, opt.tol, opt.max_iter, "darcy-cg");
  out.iters = cg.iters;
  out.rel_residual = cg.rel_residual;
  out.p = std::move(p);

  // Velocity at cell centers from the bilinear gradient.
  out.v.resize(static_cast<std::size_t>(grid.cells()));
  const double hx = grid.hx(), hy = grid.hy();
  par_for(static_cast<std::ptrdiff_t>(grid.cells()), [&](std::ptrdiff_t c) {
    const int ci = static_cast<int>(c) % grid.nx, cj = static_cast<int>(c) / grid.nx;
    const double p00 = out.p[static_cast<std::size_t>(grid.node_index(ci, cj))];
    const double p10 = out.p[static_cast<std::size_t>(grid.node_index(ci + 1, cj))];
    const double p01 = out.p[static_cast<std::size_t>(grid.node_index(ci, cj + 1))];
    const double p11 = out.p[static_cast<std::size_t>(grid.node_index(ci + 1, cj + 1))];
    const Vec2 gradp{(p10 + p11 - p00 - p01) * 0.5 / hx, (p01 + p11 - p00 - p10) * 0.5 / hy};
    const Mat2& K = Kfield[static_cast<std::size_t>(c)];
    out.v[static_cast<std::size_t>(c)] = -(K * gradp);
  });

  // Global balance: Dirichlet reactions give the outflow there exactly.
  std::vector<double> Ap(n);
  q1::apply(grid, A0, out.p, Ap);
  double reaction_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (dir_mask[k]) reaction_sum += Ap[k] - b0[k];
  double f_int = 0.0;
  if (!data.f.empty())
    f_int = par_sum(static_cast<std::ptrdiff_t>(grid.cells()),
                    [&](std::ptrdiff_t c) { return data.f[static_cast<std::size_t>(c)]; }) *
            hx * hy;
  double flux_in = 0.0;
  const std::array<double, 4> edge_len{grid.Ly, grid.Ly, grid.Lx, grid.Lx};
  for (int e = 0; e < 4; ++e)
    if (grid.boundary[static_cast<std::size_t>(e)] == EdgeKind::flux)
      flux_in += data.g_flux[static_cast<std::size_t>(e)] * edge_len[static_cast<std::size_t>(e)];
  // reaction_sum = -f_int - flux_in for the exact discrete solution.
  out.mass_balance = std::abs(reaction_sum + f_int + flux_in);

  return out;
}

ContinuityReport continuity_experiment(const MacroGrid& grid, const std::vector<Mat2>& K1,
                                       const std::vector<Mat2>& K2, const DarcyData& data,
                                       const DarcyOptions& opt) {
  const DarcyField a = solve_darcy(grid, K1, data, opt);
  const DarcyField b = solve_darcy(grid, K2, data, opt);

  ContinuityReport rep;
  for (int c = 0; c < grid.cells(); ++c)
    rep.dk_linf = std::max(rep.dk_linf, max_abs(K2[static_cast<std::size_t>(c)] - K1[static_cast<std::size_t>(c)]));

  const double cell_area = grid.hx() * grid.hy();
  double v2 = 0.0, p2 = 0.0;
  for (int c = 0; c < grid.cells(); ++c) {
    const Vec2 dv = b.v[static_cast<std::size_t>(c)] - a.v[static_cast<std::size_t>(c)];
    v2 += norm_sq(dv) * cell_area;
    rep.dv_linf = std::max(rep.dv_linf, std::max(std::abs(dv.x), std::abs(dv.y)));
  }
  // H1 seminorm plus lumped L2 of the pressure difference at cell centers.
  const double hx = grid.hx(), hy = grid.hy();
  for (int cj = 0; cj < grid.ny; ++cj)
    for (int ci = 0; ci < grid.nx; ++ci) {
      const auto nd = [&](int di, int dj) {
        return b.p[static_cast<std::size_t>(grid.node_index(ci + di, cj + dj))] -
               a.p[static_cast<std::size_t>(grid.node_index(ci + di, cj + dj))];
      };
      const double d00 = nd(0, 0), d10 = nd(1, 0), d01 = nd(0, 1), d11 = nd(1, 1);
      const double mean = 0.25 * (d00 + d10 + d01 + d11);
      const Vec2 grad{(d10 + d11 - d00 - d01) * 0.5 / hx, (d01 + d11 - d00 - d10) * 0.5 / hy};
      p2 += (mean * mean + norm_sq(grad)) * cell_area;
    }
  rep.dv_l2 = std::sqrt(v2);
  rep.dp_h1 = std::sqrt(p2);
  rep.ratio_l2 = rep.dk_linf > 0.0 ? rep.dv_l2 / rep.dk_linf : 0.0;
  rep.ratio_linf = rep.dk_linf > 0.0 ? rep.dv_linf / std::sqrt(rep.dk_linf) : 0.0;
  return rep;
}

DarcySlices darcy_time_slices(const MacroGrid& grid, const std::vector<std::vector<Mat2>>& Kts,
                              const DarcyData& data, const DarcyOptions& opt) {
  DarcySlices out;
  out.slices.reserve(Kts.size());
  for (const auto& K : Kts) out.slices.push_back(solve_darcy(grid, K, data, opt));

  const double cell_area = grid.hx() * grid.hy();
  for (std::size_t k = 0; k + 1 < out.slices.size(); ++k) {
    double acc = 0.0;
    for (int c = 0; c < grid.cells(); ++c) {
      const Vec2 dv =
          out.slices[k + 1].v[static_cast<std::size_t>(c)] - out.slices[k].v[static_cast<std::size_t>(c)];
      acc += norm_sq(dv) * cell_area;
    }
    out.v_diff_l2.push_back(std::sqrt(acc));
  }
  return out;
}

}  // namespace poroscale
