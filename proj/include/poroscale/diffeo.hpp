#pragma once

#include <functional>

#include "poroscale/geometry.hpp"
#include "poroscale/vec2.hpp"

namespace poroscale {

// Smooth map of the unit cell onto itself, identity near the cell boundary.
struct DiffeoMap {
  std::function<Vec2(Vec2)> eval;
  std::function<Mat2(Vec2)> jac;
};

// Radial map carrying the circle of radius r2 onto the circle of radius r1:
// h(y) = g(|y|) y with g = r1/r2 inside r2, g = 1 outside 1/2 - margin, and a
// quintic smoothstep blend in between (profile is C^2, constant near both
// blend ends). Throws DegeneracyError("invalid-deformation") if the sampled
// Jacobian determinant is not positive (too extreme a radius ratio).
DiffeoMap circle_diffeo(double r1, double r2, double margin = 0.05);

// One-parameter family of unit-cell deformations. map_at(s) builds the map
// h_s carrying the initial geometry to the geometry at pseudo-time s (build
// once, evaluate many); field_at samples the deformed geometry on a grid.
struct DiffeoPath {
  double s_min = 0.0;
  double s_max = 0.0;
  double margin = 0.05;
  std::function<DiffeoMap(double)> map_at;
  std::function<double(double)> radius;  // analytic radius for circle families
  std::function<LevelSetField(double, const UnitCellGrid&)> field_at;

  Vec2 eval(double s, Vec2 y) const { return map_at(s).eval(y); }
  Mat2 jac(double s, Vec2 y) const { return map_at(s).jac(y); }
};

// Circle family: radius moves linearly from r_start to r_end as s goes from 0
// to |r_end - r_start| (unit-speed radius change).
DiffeoPath circle_radius_path(double r_start, double r_end, double margin = 0.05);

// Pullback (h* f)(y) = f(h(y)) by bilinear interpolation on f's grid.
// Throws DegeneracyError("out-of-domain") if h maps a node outside the cell.
LevelSetField pullback(const DiffeoMap& h, const LevelSetField& f);

// Porosity of the deformed configuration: integral of |det grad h_s| over the
// discrete fluid set {phi0 < 0} by midpoint quadrature with fluid area
// fractions. Throws DegeneracyError("invalid-deformation") on det <= 0.
double jacobian_porosity(const DiffeoPath& path, double s, const LevelSetField& phi0);

}  // namespace poroscale
