#include "poroscale/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"

namespace poroscale {

namespace {

// Quintic smoothstep: C^2 ramp 0 -> 1 on [0, 1].
double ramp01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double ramp01_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 30.0 * u * u;
}

struct Trajectory {
  Vec2 x;
  Vec2 p;
  double zint;    // integral of the conserved rate, 0 analytically
  double p4;      // augmented costate -v(y0)|p(0)|, constant in time
  double factor;  // band factor frozen at launch, includes vmod
};

struct Rate {
  Vec2 dx;
  Vec2 dp;
  double dz;
};

}  // namespace

SpeedField uniform_speed(const LevelSetField& phi0, double amplitude) {
  const auto field = std::make_shared<LevelSetField>(phi0);
  const double h = phi0.grid.h;
  const double margin = phi0.grid.margin;
  const double w = 2.0 * h;
  const double band = 6.0 * h;

  SpeedField s;
  s.base = [amplitude, margin, w](Vec2 y) {
    const double d = 0.5 - std::max(std::abs(y.x), std::abs(y.y));
    return amplitude * ramp01((d - margin) / w);
  };
  s.base_grad = [amplitude, margin, w](Vec2 y) -> Vec2 {
    const double ax = std::abs(y.x), ay = std::abs(y.y);
    const double d = 0.5 - std::max(ax, ay);
    const double dr = amplitude * ramp01_deriv((d - margin) / w) / w;
    if (dr == 0.0) return {0.0, 0.0};
    if (ax >= ay) return {dr * (y.x > 0.0 ? -1.0 : 1.0), 0.0};
    return {0.0, dr * (y.y > 0.0 ? -1.0 : 1.0)};
  };
  s.band_factor = [field, band, w](Vec2 y) {
    const double q = std::abs(field->interp(y));
    return 1.0 - ramp01((q - band) / w);
  };
  return s;
}

EvolvedPath evolve(const LevelSetField& phi0, const SpeedField& speed, double dt, int steps) {
  if (!(dt > 0.0) || steps < 1)
    throw ConfigError("evolve-args", "need dt > 0 and steps >= 1");
  validate_levelset(phi0, "initial geometry");

  const UnitCellGrid& g = phi0.grid;
  const int nn = g.nodes();
  const double band = 6.0 * g.h;

  EvolvedPath path;
  path.grid = g;
  const InterfacePolyline poly0 = extract_interface(phi0);
  if (poly0.empty())
    throw DegeneracyError("invalid-geometry", "no interface to evolve");
  path.curves.push_back(poly0);
  path.tubular_radius = tubular_radius(poly0);

  // Launch set: nodes near the interface with a usable costate.
  std::vector<int> node_slot(static_cast<std::size_t>(nn) * nn, -1);
  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < nn; ++i) {
      if (std::abs(phi0(i, j)) > band) continue;
      if (norm(phi0.grad_at_node(i, j)) < 0.5) continue;
      node_slot[static_cast<std::size_t>(g.node_index(i, j))] =
          static_cast<int>(path.launch_nodes.size());
      path.launch_nodes.push_back(g.node_index(i, j));
    }

  const int n_launch = static_cast<int>(path.launch_nodes.size());
  const int n_vert = static_cast<int>(poly0.vertices.size());
  const int n_traj = n_launch + n_vert;

  std::vector<Trajectory> traj(static_cast<std::size_t>(n_traj));
  for (int t = 0; t < n_launch; ++t) {
    const int k = path.launch_nodes[static_cast<std::size_t>(t)];
    const int i = k % nn, j = k / nn;
    traj[static_cast<std::size_t>(t)].x = g.node(i, j);
    traj[static_cast<std::size_t>(t)].p = phi0.grad_at_node(i, j);
  }
  for (int t = 0; t < n_vert; ++t) {
    const Vec2 y = poly0.vertices[static_cast<std::size_t>(t)];
    traj[static_cast<std::size_t>(n_launch + t)].x = y;
    traj[static_cast<std::size_t>(n_launch + t)].p = phi0.grad_interp(y);
  }
  for (auto& tr : traj) {
    if (norm(tr.p) < 1e-8)
      throw DegeneracyError("path-validity", "vanishing costate at a launch point");
    tr.zint = 0.0;
    tr.factor = speed.vmod * speed.band_factor(tr.x);
    tr.p4 = -tr.factor * speed.base(tr.x) * norm(tr.p);
  }

  path.max_speed =
      par_max(n_traj, [&](std::ptrdiff_t t) { return std::abs(traj[static_cast<std::size_t>(t)].factor * speed.base(traj[static_cast<std::size_t>(t)].x)); });

  const double offset = dt * steps * path.max_speed;
  if (offset > 0.8 * path.tubular_radius)
    throw HorizonError("validity-horizon",
                       "requested offset " + std::to_string(offset) + " exceeds 80% of the tubular radius " +
                           std::to_string(path.tubular_radius));

  // Sample 0: identity map, reconstruction of the initial interface.
  path.times.push_back(0.0);
  path.maps.emplace_back(static_cast<std::size_t>(n_launch));
  for (int t = 0; t < n_launch; ++t)
    path.maps[0][static_cast<std::size_t>(t)] = traj[static_cast<std::size_t>(t)].x;
  path.fields.push_back(signed_distance_field(g, poly0));
  validate_levelset(path.fields[0], "reconstructed geometry");

  const double margin_line = 0.5 - g.margin;
  std::vector<unsigned char> flag(static_cast<std::size_t>(n_traj), 0);

  const auto rate = [&speed](const Vec2& x, const Vec2& p, double factor, double p4) -> Rate {
    const double pn = norm(p);
    const double v = factor * speed.base(x);
    const Vec2 gv = speed.base_grad(x) * factor;
    Rate r;
    r.dx = p * (v / pn);
    r.dp = gv * (-pn);
    r.dz = v * pn + p4;
    return r;
  };

  for (int s = 1; s <= steps; ++s) {
    par_for(n_traj, [&](std::ptrdiff_t ti) {
      Trajectory& tr = traj[static_cast<std::size_t>(ti)];
      if (norm(tr.p) < 1e-12) {
        flag[static_cast<std::size_t>(ti)] = 2;
        return;
      }
      const Rate k1 = rate(tr.x, tr.p, tr.factor, tr.p4);
      const Rate k2 = rate(tr.x + k1.dx * (0.5 * dt), tr.p + k1.dp * (0.5 * dt), tr.factor, tr.p4);
      const Rate k3 = rate(tr.x + k2.dx * (0.5 * dt), tr.p + k2.dp * (0.5 * dt), tr.factor, tr.p4);
      const Rate k4 = rate(tr.x + k3.dx * dt, tr.p + k3.dp * dt, tr.factor, tr.p4);
      tr.x = tr.x + (k1.dx + (k2.dx + k3.dx) * 2.0 + k4.dx) * (dt / 6.0);
      tr.p = tr.p + (k1.dp + (k2.dp + k3.dp) * 2.0 + k4.dp) * (dt / 6.0);
      tr.zint += (k1.dz + 2.0 * (k2.dz + k3.dz) + k4.dz) * (dt / 6.0);
      if (std::max(std::abs(tr.x.x), std::abs(tr.x.y)) >= margin_line)
        flag[static_cast<std::size_t>(ti)] = 1;
    });
    for (int t = 0; t < n_traj; ++t) {
      if (flag[static_cast<std::size_t>(t)] == 1)
        throw DegeneracyError("path-validity", "trajectory entered the margin band at step " + std::to_string(s));
      if (flag[static_cast<std::size_t>(t)] == 2)
        throw DegeneracyError("path-validity", "costate collapsed at step " + std::to_string(s));
    }

    const double drift =
        par_max(n_traj, [&](std::ptrdiff_t t) { return std::abs(traj[static_cast<std::size_t>(t)].zint); });
    path.z_drift = std::max(path.z_drift, drift);

    path.times.push_back(dt * s);
    auto& map = path.maps.emplace_back(static_cast<std::size_t>(n_launch));
    for (int t = 0; t < n_launch; ++t) map[static_cast<std::size_t>(t)] = traj[static_cast<std::size_t>(t)].x;

    // Discrete Jacobian where the full four-neighbor stencil was launched.
    for (int t = 0; t < n_launch; ++t) {
      const int k = path.launch_nodes[static_cast<std::size_t>(t)];
      const int i = k % nn, j = k / nn;
      if (i == 0 || j == 0 || i == nn - 1 || j == nn - 1) continue;
      const int e = node_slot[static_cast<std::size_t>(k + 1)], w = node_slot[static_cast<std::size_t>(k - 1)];
      const int no = node_slot[static_cast<std::size_t>(k + nn)], so = node_slot[static_cast<std::size_t>(k - nn)];
      if (e < 0 || w < 0 || no < 0 || so < 0) continue;
      const Vec2 dx = map[static_cast<std::size_t>(e)] - map[static_cast<std::size_t>(w)];
      const Vec2 dy = map[static_cast<std::size_t>(no)] - map[static_cast<std::size_t>(so)];
      const double det = dx.x * dy.y - dx.y * dy.x;
      if (det <= 0.0)
        throw DegeneracyError("fold", "map Jacobian determinant " + std::to_string(det / (4.0 * g.h * g.h)) +
                                          " at step " + std::to_string(s));
    }

    InterfacePolyline cur;
    cur.loop_begin = poly0.loop_begin;
    cur.vertices.resize(static_cast<std::size_t>(n_vert));
    for (int t = 0; t < n_vert; ++t)
      cur.vertices[static_cast<std::size_t>(t)] = traj[static_cast<std::size_t>(n_launch + t)].x;
    path.fields.push_back(signed_distance_field(g, cur));
    validate_levelset(path.fields.back(), "reconstructed geometry");
    path.curves.push_back(std::move(cur));
  }

  return path;
}

PhiSigmaReport phi_sigma_relation_check(const EvolvedPath& path) {
  const int m = path.samples();
  if (m < 3) throw ConfigError("phi-sigma-samples", "need at least 3 samples for centered differences");

  PhiSigmaReport rep;
  rep.phi.resize(static_cast<std::size_t>(m));
  rep.sigma.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    rep.phi[static_cast<std::size_t>(k)] = porosity(path.fields[static_cast<std::size_t>(k)]);
    rep.sigma[static_cast<std::size_t>(k)] = path.curves[static_cast<std::size_t>(k)].length();
  }
  double mean_slope = 0.0;
  for (int k = 1; k + 1 < m; ++k) {
    const double ds = path.times[static_cast<std::size_t>(k + 1)] - path.times[static_cast<std::size_t>(k - 1)];
    const double slope = (rep.phi[static_cast<std::size_t>(k + 1)] - rep.phi[static_cast<std::size_t>(k - 1)]) / ds;
    rep.dphi_ds.push_back(slope);
    mean_slope += slope;
    const double sg = rep.sigma[static_cast<std::size_t>(k)];
    if (sg > 0.0)
      rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(std::abs(slope) - sg) / sg);
  }
  rep.sign = mean_slope > 0.0 ? 1 : (mean_slope < 0.0 ? -1 : 0);
  return rep;
}

LevelSetField field_at_time(const EvolvedPath& path, const std::function<double(double)>& speed_history,
                            double t) {
  if (t < 0.0) throw HorizonError("validity-horizon", "negative time");
  // Composite Simpson; exact for cubic histories, ample for smooth ones.
  double V = 0.0;
  if (t > 0.0) {
    const int panels = 256;
    const double dt = t / (2 * panels);
    V = speed_history(0.0) + speed_history(t);
    for (int i = 1; i < 2 * panels; ++i) V += (i % 2 ? 4.0 : 2.0) * speed_history(i * dt);
    V *= dt / 3.0;
  }

  const double s_max = path.times.back();
  const double tol = 1e-12 * std::max(1.0, s_max);
  if (V < path.times.front() - tol || V > s_max + tol)
    throw HorizonError("validity-horizon", "pseudo-time " + std::to_string(V) + " outside the sampled range [0, " +
                                               std::to_string(s_max) + "]");
  V = std::clamp(V, path.times.front(), s_max);

  auto it = std::upper_bound(path.times.begin(), path.times.end(), V);
  int k = static_cast<int>(it - path.times.begin()) - 1;
  if (k >= path.samples() - 1) k = path.samples() - 2;
  const double w = (V - path.times[static_cast<std::size_t>(k)]) /
                   (path.times[static_cast<std::size_t>(k + 1)] - path.times[static_cast<std::size_t>(k)]);

  const LevelSetField& a = path.fields[static_cast<std::size_t>(k)];
  const LevelSetField& b = path.fields[static_cast<std::size_t>(k + 1)];
  LevelSetField out(path.grid);
  par_for(static_cast<std::ptrdiff_t>(out.values.size()), [&](std::ptrdiff_t i) {
    out.values[static_cast<std::size_t>(i)] =
        (1.0 - w) * a.values[static_cast<std::size_t>(i)] + w * b.values[static_cast<std::size_t>(i)];
  });
  return out;
}

InterfacePolyline normal_offset_parameterization(const LevelSetField& phi0, double s) {
  validate_levelset(phi0, "offset geometry");
  InterfacePolyline poly = extract_interface(phi0);
  if (poly.empty()) throw DegeneracyError("invalid-geometry", "no interface to offset");

  const double r_tub = tubular_radius(poly);
  if (std::abs(s) >= r_tub)
    throw HorizonError("validity-horizon",
                       "offset " + std::to_string(s) + " at or beyond the tubular radius " + std::to_string(r_tub));

  for (auto& v : poly.vertices) {
    const Vec2 grd = phi0.grad_interp(v);
    const double gn = norm(grd);
    if (gn < 1e-8) throw DegeneracyError("path-validity", "vanishing gradient on the interface");
    v = v + grd * (-s / gn);
  }
  return poly;
}

}  // namespace poroscale
