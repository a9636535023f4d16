#include "poroscale/interface_curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"

namespace poroscale {

double InterfacePolyline::length() const {
  double total = 0.0;
  for (int k = 0; k < loops(); ++k) {
    const int b = loop_begin[k], e = loop_begin[k + 1];
    for (int v = b; v < e; ++v) {
      const Vec2& p = vertices[static_cast<std::size_t>(v)];
      const Vec2& q = vertices[static_cast<std::size_t>(v + 1 == e ? b : v + 1)];
      total += norm(q - p);
    }
  }
  return total;
}

std::vector<int> InterfacePolyline::component_ids() const {
  std::vector<int> ids(vertices.size());
  for (int k = 0; k < loops(); ++k)
    for (int v = loop_begin[k]; v < loop_begin[k + 1]; ++v) ids[static_cast<std::size_t>(v)] = k;
  return ids;
}

namespace {

struct SegmentSoup {
  std::vector<std::pair<int, int>> segs;  // pairs of global edge keys
};

// Global edge keys: horizontal edge (i, j) between nodes (i,j)-(i+1,j), then
// vertical edge (i, j) between nodes (i,j)-(i,j+1).
struct EdgeKeys {
  int n;
  int hkey(int i, int j) const { return j * n + i; }
  int vkey(int i, int j) const { return n * (n + 1) + j * (n + 1) + i; }
  int total() const { return 2 * n * (n + 1); }
};

}  // namespace

InterfacePolyline extract_interface(const LevelSetField& phi) {
  const int n = phi.grid.n;
  const EdgeKeys ek{n};

  // Crossing positions per global edge, computed once so shared endpoints are
  // bitwise identical between neighboring cells.
  std::vector<Vec2> cross_pos(static_cast<std::size_t>(ek.total()));
  std::vector<char> crossed(static_cast<std::size_t>(ek.total()), 0);

  auto edge_crossing = [&](int key, int i0, int j0, int i1, int j1) {
    if (crossed[static_cast<std::size_t>(key)]) return;
    const double a = phi(i0, j0), b = phi(i1, j1);
    const double t = a / (a - b);
    const Vec2 pa = phi.grid.node(i0, j0), pb = phi.grid.node(i1, j1);
    cross_pos[static_cast<std::size_t>(key)] = pa + t * (pb - pa);
    crossed[static_cast<std::size_t>(key)] = 1;
  };

  SegmentSoup soup;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double f00 = phi(i, j), f10 = phi(i + 1, j), f11 = phi(i + 1, j + 1), f01 = phi(i, j + 1);
      const bool s00 = f00 >= 0.0, s10 = f10 >= 0.0, s11 = f11 >= 0.0, s01 = f01 >= 0.0;
      if (s00 == s10 && s00 == s11 && s00 == s01) continue;

      const int bottom = ek.hkey(i, j), top = ek.hkey(i, j + 1);
      const int left = ek.vkey(i, j), right = ek.vkey(i + 1, j);
      const bool cb = s00 != s10, cr = s10 != s11, ct = s01 != s11, cl = s00 != s01;
      if (cb) edge_crossing(bottom, i, j, i + 1, j);
      if (ct) edge_crossing(top, i, j + 1, i + 1, j + 1);
      if (cl) edge_crossing(left, i, j, i, j + 1);
      if (cr) edge_crossing(right, i + 1, j, i + 1, j + 1);

      const int ncross = int(cb) + int(cr) + int(ct) + int(cl);
      if (ncross == 2) {
        std::array<int, 2> keys;
        int w = 0;
        if (cb) keys[static_cast<std::size_t>(w++)] = bottom;
        if (cr) keys[static_cast<std::size_t>(w++)] = right;
        if (ct) keys[static_cast<std::size_t>(w++)] = top;
        if (cl) keys[static_cast<std::size_t>(w++)] = left;
        soup.segs.emplace_back(keys[0], keys[1]);
      } else if (ncross == 4) {
        // Saddle: connectivity follows the sign of the cell average.
        const bool center_solid = 0.25 * (f00 + f10 + f11 + f01) >= 0.0;
        // Diagonal solid pair is {00, 11} iff s00; the center sign decides
        // whether the solid or the fluid diagonal is connected.
        const bool solid_00_11 = s00;
        if (solid_00_11 == center_solid) {
          // Cut off the two corners NOT on the connected diagonal.
          soup.segs.emplace_back(bottom, right);  // around corner 10
          soup.segs.emplace_back(left, top);      // around corner 01
        } else {
          soup.segs.emplace_back(bottom, left);  // around corner 00
          soup.segs.emplace_back(right, top);    // around corner 11
        }
      }
      // ncross == 0 with mixed signs cannot happen for a 4-corner cell.
    }
  }

  // Incidence: every crossed edge must belong to exactly two segments,
  // otherwise a chain is open (interface touches the cell boundary).
  std::vector<std::array<int, 2>> incident(static_cast<std::size_t>(ek.total()), {-1, -1});
  auto add_incident = [&](int key, int seg) {
    auto& in = incident[static_cast<std::size_t>(key)];
    if (in[0] < 0)
      in[0] = seg;
    else if (in[1] < 0)
      in[1] = seg;
    else
      throw DegeneracyError("invalid-geometry", "interface extraction: edge shared by more than two segments");
  };
  for (int s = 0; s < static_cast<int>(soup.segs.size()); ++s) {
    add_incident(soup.segs[static_cast<std::size_t>(s)].first, s);
    add_incident(soup.segs[static_cast<std::size_t>(s)].second, s);
  }
  for (int key = 0; key < ek.total(); ++key)
    if (crossed[static_cast<std::size_t>(key)] && incident[static_cast<std::size_t>(key)][1] < 0)
      throw DegeneracyError("invalid-geometry", "interface extraction: open chain (interface not compactly contained)");

  InterfacePolyline poly;
  poly.loop_begin.push_back(0);
  std::vector<char> used(soup.segs.size(), 0);
  for (int s0 = 0; s0 < static_cast<int>(soup.segs.size()); ++s0) {
    if (used[static_cast<std::size_t>(s0)]) continue;
    int seg = s0;
    int entry = soup.segs[static_cast<std::size_t>(s0)].first;
    while (!used[static_cast<std::size_t>(seg)]) {
      used[static_cast<std::size_t>(seg)] = 1;
      poly.vertices.push_back(cross_pos[static_cast<std::size_t>(entry)]);
      const auto& [a, b] = soup.segs[static_cast<std::size_t>(seg)];
      const int exit = entry == a ? b : a;
      const auto& in = incident[static_cast<std::size_t>(exit)];
      seg = in[0] == seg ? in[1] : in[0];
      entry = exit;
    }
    poly.loop_begin.push_back(static_cast<int>(poly.vertices.size()));
  }
  return poly;
}

double surface_area(const LevelSetField& phi) {
  if (!has_interface(phi)) return 0.0;
  return extract_interface(phi).length();
}

double max_curvature(const InterfacePolyline& poly, int stride) {
  double kmax = 0.0;
  for (int k = 0; k < poly.loops(); ++k) {
    const int b = poly.loop_begin[k];
    const int sz = poly.loop_size(k);
    if (sz < 3) continue;
    const int st = std::min(stride, (sz - 1) / 2);
    for (int v = 0; v < sz; ++v) {
      const Vec2& p0 = poly.vertices[static_cast<std::size_t>(b + (v - st + sz) % sz)];
      const Vec2& p1 = poly.vertices[static_cast<std::size_t>(b + v)];
      const Vec2& p2 = poly.vertices[static_cast<std::size_t>(b + (v + st) % sz)];
      const double la = norm(p1 - p0), lb = norm(p2 - p1), lc = norm(p2 - p0);
      if (la * lb * lc == 0.0) continue;
      const double kappa = 2.0 * std::abs(cross(p1 - p0, p2 - p0)) / (la * lb * lc);
      if (kappa > kmax) kmax = kappa;
    }
  }
  return kmax;
}

double tubular_radius(const InterfacePolyline& poly) {
  const double kmax = max_curvature(poly);
  return kmax > 0.0 ? 1.0 / kmax : std::numeric_limits<double>::max();
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = norm_sq(ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * ab));
}

namespace {

// Flat arrays over all closed-loop segments for tight inner loops.
struct FlatSegments {
  std::vector<double> ax, ay, bx, by;

  explicit FlatSegments(const InterfacePolyline& poly) {
    const std::size_t count = poly.vertices.size();
    ax.reserve(count);
    ay.reserve(count);
    bx.reserve(count);
    by.reserve(count);
    for (int k = 0; k < poly.loops(); ++k) {
      const int b = poly.loop_begin[k], e = poly.loop_begin[k + 1];
      for (int v = b; v < e; ++v) {
        const Vec2& p = poly.vertices[static_cast<std::size_t>(v)];
        const Vec2& q = poly.vertices[static_cast<std::size_t>(v + 1 == e ? b : v + 1)];
        ax.push_back(p.x);
        ay.push_back(p.y);
        bx.push_back(q.x);
        by.push_back(q.y);
      }
    }
  }

  std::size_t size() const { return ax.size(); }

  DistanceParity query(double px, double py) const {
    double best = std::numeric_limits<double>::max();
    bool inside = false;
    for (std::size_t s = 0; s < size(); ++s) {
      const double axs = ax[s], ays = ay[s], bxs = bx[s], bys = by[s];
      double ex = bxs - axs, ey = bys - ays;
      const double len2 = ex * ex + ey * ey;
      double t = len2 > 0.0 ? ((px - axs) * ex + (py - ays) * ey) / len2 : 0.0;
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      const double dx = px - (axs + t * ex), dy = py - (ays + t * ey);
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) best = d2;
      if ((ays > py) != (bys > py)) {
        const double xint = axs + (py - ays) * (bxs - axs) / (bys - ays);
        if (xint > px) inside = !inside;
      }
    }
    return {std::sqrt(best), inside};
  }
};

}  // namespace

DistanceParity distance_and_parity(const Vec2& p, const InterfacePolyline& poly) {
  return FlatSegments(poly).query(p.x, p.y);
}

LevelSetField signed_distance_field(const UnitCellGrid& grid, const InterfacePolyline& poly) {
  if (poly.empty()) throw DegeneracyError("invalid-geometry", "signed distance to an empty polyline");
  const FlatSegments segs(poly);
  LevelSetField out(grid);
  const int m = grid.nodes();
  par_for(static_cast<std::ptrdiff_t>(m) * m, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / m;
    const int i = static_cast<int>(k) % m;
    const Vec2 y = grid.node(i, j);
    const DistanceParity dp = segs.query(y.x, y.y);
    out.values[static_cast<std::size_t>(k)] = dp.inside ? dp.distance : -dp.distance;
  });
  return out;
}

double hausdorff_distance(const InterfacePolyline& a, const InterfacePolyline& b) {
  const FlatSegments fa(a), fb(b);
  auto one_way = [](const InterfacePolyline& from, const FlatSegments& to) {
    return par_max(static_cast<std::ptrdiff_t>(from.vertices.size()), [&](std::ptrdiff_t v) {
      const Vec2& p = from.vertices[static_cast<std::size_t>(v)];
      return to.query(p.x, p.y).distance;
    });
  };
  return std::max(one_way(a, fb), one_way(b, fa));
}

}  // namespace poroscale
