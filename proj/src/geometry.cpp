#include "poroscale/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"

namespace poroscale {

UnitCellGrid::UnitCellGrid(int n_cells, double margin_width) {
  if (n_cells < 16) throw ConfigError("grid-too-coarse", "unit cell grid needs n >= 16, got n = " + std::to_string(n_cells));
  n = n_cells;
  h = 1.0 / n;
  margin = margin_width < 0.0 ? std::max(3.0 * h, 0.02) : margin_width;
  if (margin < 3.0 * h)
    throw ConfigError("margin-too-small", "containment margin must be >= 3h = " + std::to_string(3.0 * h));
}

double LevelSetField::interp(Vec2 y) const {
  const int n = grid.n;
  const double h = grid.h;
  double sx = (y.x + 0.5) / h;
  double sy = (y.y + 0.5) / h;
  sx = std::clamp(sx, 0.0, static_cast<double>(n));
  sy = std::clamp(sy, 0.0, static_cast<double>(n));
  int i = std::min(static_cast<int>(sx), n - 1);
  int j = std::min(static_cast<int>(sy), n - 1);
  const double tx = sx - i;
  const double ty = sy - j;
  const double f00 = (*this)(i, j), f10 = (*this)(i + 1, j);
  const double f01 = (*this)(i, j + 1), f11 = (*this)(i + 1, j + 1);
  return (1 - tx) * (1 - ty) * f00 + tx * (1 - ty) * f10 + (1 - tx) * ty * f01 + tx * ty * f11;
}

Vec2 LevelSetField::grad_at_node(int i, int j) const {
  const int n = grid.n;
  const double h = grid.h;
  double gx, gy;
  if (i == 0)
    gx = ((*this)(1, j) - (*this)(0, j)) / h;
  else if (i == n)
    gx = ((*this)(n, j) - (*this)(n - 1, j)) / h;
  else
    gx = ((*this)(i + 1, j) - (*this)(i - 1, j)) / (2.0 * h);
  if (j == 0)
    gy = ((*this)(i, 1) - (*this)(i, 0)) / h;
  else if (j == n)
    gy = ((*this)(i, n) - (*this)(i, n - 1)) / h;
  else
    gy = ((*this)(i, j + 1) - (*this)(i, j - 1)) / (2.0 * h);
  return {gx, gy};
}

Vec2 LevelSetField::grad_interp(Vec2 y) const {
  const int n = grid.n;
  const double h = grid.h;
  double sx = std::clamp((y.x + 0.5) / h, 0.0, static_cast<double>(n));
  double sy = std::clamp((y.y + 0.5) / h, 0.0, static_cast<double>(n));
  int i = std::min(static_cast<int>(sx), n - 1);
  int j = std::min(static_cast<int>(sy), n - 1);
  const double tx = sx - i;
  const double ty = sy - j;
  const Vec2 g00 = grad_at_node(i, j), g10 = grad_at_node(i + 1, j);
  const Vec2 g01 = grad_at_node(i, j + 1), g11 = grad_at_node(i + 1, j + 1);
  return (1 - tx) * (1 - ty) * g00 + tx * (1 - ty) * g10 + (1 - tx) * ty * g01 + tx * ty * g11;
}

LevelSetField circle_levelset(double r, const UnitCellGrid& grid, Vec2 center) {
  if (!(r > 0.0))
    throw DegeneracyError("invalid-geometry", "circle radius must be positive");
  const double reach = std::max(std::abs(center.x), std::abs(center.y)) + r;
  if (!(reach + grid.margin < 0.5))
    throw DegeneracyError("invalid-geometry",
                          "solid disk reaches into the containment margin: |c| + r + margin >= 1/2");
  LevelSetField phi(grid);
  const int m = grid.nodes();
  par_for(static_cast<std::ptrdiff_t>(m) * m, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / m;
    const int i = static_cast<int>(k) % m;
    const double rho = norm(grid.node(i, j) - center);
    // Quadratic cap: value r/2 and slope -1 at rho = r/2.
    phi.values[static_cast<std::size_t>(k)] = rho >= 0.5 * r ? r - rho : 0.75 * r - rho * rho / r;
  });
  return phi;
}

LevelSetField union_levelset(const LevelSetField& a, const LevelSetField& b) {
  if (!(a.grid == b.grid)) throw DegeneracyError("invalid-geometry", "union of fields on different grids");
  LevelSetField out(a.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = std::max(a.values[k], b.values[k]);
  return out;
}

namespace {

// Fluid (value < 0) area fraction of a triangle with vertex values a, b, c,
// linear interpolation, unit total area.
double triangle_fluid_fraction(double a, double b, double c) {
  // Sort so a <= b <= c.
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
  if (c < 0.0) return 1.0;   // all fluid
  if (a >= 0.0) return 0.0;  // all solid (zero counts as solid)
  if (b >= 0.0) {
    // One fluid vertex: similar triangle cut by the zero line.
    const double ta = a / (a - b);  // fraction along edge a->b
    const double sa = a / (a - c);
    return ta * sa;
  }
  // Two fluid vertices: complement of the solid corner triangle at c.
  const double tc = c / (c - a);
  const double sc = c / (c - b);
  return 1.0 - tc * sc;
}

}  // namespace

double cell_fluid_fraction(const LevelSetField& phi, int i, int j) {
  const double f00 = phi(i, j), f10 = phi(i + 1, j);
  const double f01 = phi(i, j + 1), f11 = phi(i + 1, j + 1);
  if (f00 < 0.0 && f10 < 0.0 && f01 < 0.0 && f11 < 0.0) return 1.0;
  if (f00 >= 0.0 && f10 >= 0.0 && f01 >= 0.0 && f11 >= 0.0) return 0.0;
  // Split into four triangles around the cell-average center value; this
  // realizes the cell-average rule for saddle cells and integrates the linear
  // reconstruction exactly on each triangle (each triangle has area 1/4).
  const double fc = 0.25 * (f00 + f10 + f01 + f11);
  return 0.25 * (triangle_fluid_fraction(f00, f10, fc) + triangle_fluid_fraction(f10, f11, fc) +
                 triangle_fluid_fraction(f11, f01, fc) + triangle_fluid_fraction(f01, f00, fc));
}

double porosity(const LevelSetField& phi) {
  const int n = phi.grid.n;
  const double cell_area = phi.grid.h * phi.grid.h;
  const double total = par_sum(static_cast<std::ptrdiff_t>(n) * n, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    return cell_fluid_fraction(phi, i, j);
  });
  const double result = total * cell_area;
  if (result == 0.0) std::clog << "warning: degenerate-geometry: all-solid cell, porosity 0\n";
  return result;
}

bool has_interface(const LevelSetField& phi) {
  const int n = phi.grid.n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const bool s00 = phi(i, j) >= 0.0, s10 = phi(i + 1, j) >= 0.0;
      const bool s01 = phi(i, j + 1) >= 0.0, s11 = phi(i + 1, j + 1) >= 0.0;
      if (s00 != s10 || s00 != s01 || s00 != s11) return true;
    }
  return false;
}

void validate_levelset(const LevelSetField& phi, const char* what) {
  const UnitCellGrid& g = phi.grid;
  const int m = g.nodes();
  // Solid set must keep clear of the margin band around the cell boundary.
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const Vec2 y = g.node(i, j);
      const double edge_dist = 0.5 - std::max(std::abs(y.x), std::abs(y.y));
      if (edge_dist <= g.margin + 1e-14 && phi(i, j) >= 0.0)
        throw DegeneracyError("invalid-geometry",
                              std::string(what) + ": solid set intersects the containment margin band");
    }
  // Interface cells need a usable gradient.
  const int n = g.n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const bool s00 = phi(i, j) >= 0.0, s10 = phi(i + 1, j) >= 0.0;
      const bool s01 = phi(i, j + 1) >= 0.0, s11 = phi(i + 1, j + 1) >= 0.0;
      if (s00 == s10 && s00 == s01 && s00 == s11) continue;
      const Vec2 gc = 0.25 * (phi.grad_at_node(i, j) + phi.grad_at_node(i + 1, j) + phi.grad_at_node(i, j + 1) +
                              phi.grad_at_node(i + 1, j + 1));
      if (norm(gc) < 0.5)
        throw DegeneracyError("invalid-geometry",
                              std::string(what) + ": |grad Phi| < 0.5 on an interface cell");
    }
}

}  // namespace poroscale
