#include "poroscale/reference.hpp"

#include <cmath>
#include <limits>

#include "poroscale/errors.hpp"

namespace poroscale {
namespace serial_ref {

double porosity(const LevelSetField& phi) {
  const int n = phi.grid.n;
  double total = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) total += cell_fluid_fraction(phi, i, j);
  return total * phi.grid.h * phi.grid.h;
}

LevelSetField signed_distance_field(const UnitCellGrid& grid, const InterfacePolyline& poly) {
  if (poly.empty()) throw DegeneracyError("invalid-geometry", "signed distance to an empty polyline");
  LevelSetField out(grid);
  const int m = grid.nodes();
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Vec2 y = grid.node(i, j);
      double best = std::numeric_limits<double>::max();
      bool inside = false;
      for (int k = 0; k < poly.loops(); ++k) {
        const int b = poly.loop_begin[k], e = poly.loop_begin[k + 1];
        for (int v = b; v < e; ++v) {
          const Vec2& a = poly.vertices[static_cast<std::size_t>(v)];
          const Vec2& c = poly.vertices[static_cast<std::size_t>(v + 1 == e ? b : v + 1)];
          const double d = dist_point_segment(y, a, c);
          if (d < best) best = d;
          if ((a.y > y.y) != (c.y > y.y)) {
            const double xint = a.x + (y.y - a.y) * (c.x - a.x) / (c.y - a.y);
            if (xint > y.x) inside = !inside;
          }
        }
      }
      out.at(i, j) = inside ? best : -best;
    }
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void periodic_stencil_apply(int n, const std::vector<double>& fx, const std::vector<double>& fy,
                            const std::vector<double>& x, std::vector<double>& y) {
  for (int j = 0; j < n; ++j) {
    const int jn = j + 1 == n ? 0 : j + 1;
    const int js = j == 0 ? n - 1 : j - 1;
    for (int i = 0; i < n; ++i) {
      const int ie = i + 1 == n ? 0 : i + 1;
      const int iw = i == 0 ? n - 1 : i - 1;
      const std::size_t k = static_cast<std::size_t>(j * n + i);
      const double xc = x[k];
      y[k] = fx[k] * (xc - x[static_cast<std::size_t>(j * n + ie)]) +
             fx[static_cast<std::size_t>(j * n + iw)] * (xc - x[static_cast<std::size_t>(j * n + iw)]) +
             fy[k] * (xc - x[static_cast<std::size_t>(jn * n + i)]) +
             fy[static_cast<std::size_t>(js * n + i)] * (xc - x[static_cast<std::size_t>(js * n + i)]);
    }
  }
}

}  // namespace serial_ref
}  // namespace poroscale
