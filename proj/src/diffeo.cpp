#include "poroscale/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"

namespace poroscale {

namespace {

double smooth01(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smooth01_deriv(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

// Radial profile g(rho) and derivative for the blend r2 -> outer.
struct RadialProfile {
  double r1, r2, outer;

  double g(double rho) const {
    if (rho >= outer) return 1.0;
    if (rho <= r2) return r1 / r2;
    const double t = (rho - r2) / (outer - r2);
    const double xi = 1.0 - smooth01(t);  // xi(r2) = 1, xi(outer) = 0
    return 1.0 - xi * (1.0 - r1 / r2);
  }

  double dg(double rho) const {
    if (rho >= outer || rho <= r2) return 0.0;
    const double t = (rho - r2) / (outer - r2);
    return (1.0 - r1 / r2) * smooth01_deriv(t) / (outer - r2);
  }
};

void check_radial_determinant(const RadialProfile& prof) {
  // det grad h = g (g + rho g'); sample densely across the blend.
  constexpr int kSamples = 4096;
  for (int k = 0; k <= kSamples; ++k) {
    const double rho = prof.outer * k / kSamples;
    const double g = prof.g(rho), dg = prof.dg(rho);
    if (!(g > 0.0) || !(g + rho * dg > 0.0))
      throw DegeneracyError("invalid-deformation",
                            "radial map loses injectivity (det <= 0) at rho = " + std::to_string(rho));
  }
}

}  // namespace

DiffeoMap circle_diffeo(double r1, double r2, double margin) {
  const double outer = 0.5 - margin;
  if (!(r1 > 0.0) || !(r2 > 0.0) || !(r1 < outer) || !(r2 < outer))
    throw DegeneracyError("invalid-deformation", "circle_diffeo radii must lie in (0, 1/2 - margin)");
  const RadialProfile prof{r1, r2, outer};
  check_radial_determinant(prof);

  DiffeoMap map;
  map.eval = [prof](Vec2 y) -> Vec2 {
    const double rho = norm(y);
    return prof.g(rho) * y;
  };
  map.jac = [prof](Vec2 y) -> Mat2 {
    const double rho = norm(y);
    if (rho < 1e-14) return Mat2::scale(prof.g(0.0));
    const double g = prof.g(rho);
    const double a = prof.dg(rho) / rho;
    return {g + a * y.x * y.x, a * y.x * y.y, a * y.x * y.y, g + a * y.y * y.y};
  };
  return map;
}

DiffeoPath circle_radius_path(double r_start, double r_end, double margin) {
  const double outer = 0.5 - margin;
  if (!(r_start > 0.0) || !(r_end > 0.0) || !(r_start < outer) || !(r_end < outer))
    throw DegeneracyError("invalid-deformation", "circle path radii must lie in (0, 1/2 - margin)");
  const double dir = r_end >= r_start ? 1.0 : -1.0;

  DiffeoPath path;
  path.s_min = 0.0;
  path.s_max = std::abs(r_end - r_start);
  path.margin = margin;
  path.radius = [r_start, dir](double s) { return r_start + dir * s; };
  path.map_at = [r_start, dir, margin](double s) { return circle_diffeo(r_start + dir * s, r_start, margin); };
  path.field_at = [r_start, dir](double s, const UnitCellGrid& grid) {
    return circle_levelset(r_start + dir * s, grid);
  };
  return path;
}

LevelSetField pullback(const DiffeoMap& h, const LevelSetField& f) {
  LevelSetField out(f.grid);
  const int m = f.grid.nodes();
  std::vector<char> bad(static_cast<std::size_t>(m) * m, 0);
  par_for(static_cast<std::ptrdiff_t>(m) * m, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / m;
    const int i = static_cast<int>(k) % m;
    const Vec2 z = h.eval(f.grid.node(i, j));
    if (std::max(std::abs(z.x), std::abs(z.y)) > 0.5 + 1e-12) {
      bad[static_cast<std::size_t>(k)] = 1;
      return;
    }
    out.values[static_cast<std::size_t>(k)] = f.interp(z);
  });
  for (std::size_t k = 0; k < bad.size(); ++k)
    if (bad[k]) throw DegeneracyError("out-of-domain", "pullback map leaves the unit cell");
  return out;
}

double jacobian_porosity(const DiffeoPath& path, double s, const LevelSetField& phi0) {
  if (s < path.s_min - 1e-14 || s > path.s_max + 1e-14)
    throw HorizonError("validity-horizon", "jacobian_porosity sample outside the path range");
  const DiffeoMap h = path.map_at(s);
  const int n = phi0.grid.n;
  const double cell_area = phi0.grid.h * phi0.grid.h;
  std::vector<char> bad(static_cast<std::size_t>(n) * n, 0);
  const double total = par_sum(static_cast<std::ptrdiff_t>(n) * n, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    const double theta = cell_fluid_fraction(phi0, i, j);
    if (theta == 0.0) return 0.0;
    const double det = h.jac(phi0.grid.cell_center(i, j)).det();
    if (det <= 0.0) {
      bad[static_cast<std::size_t>(k)] = 1;
      return 0.0;
    }
    return theta * det;
  });
  for (std::size_t k = 0; k < bad.size(); ++k)
    if (bad[k]) throw DegeneracyError("invalid-deformation", "non-positive Jacobian determinant in fluid cell");
  return total * cell_area;
}

}  // namespace poroscale
