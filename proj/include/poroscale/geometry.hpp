#pragma once

#include <vector>

#include "poroscale/vec2.hpp"

namespace poroscale {

// Square unit cell Y = (-1/2, 1/2)^2 discretized by n x n cells; level-set
// values live on the (n+1)^2 nodes.
struct UnitCellGrid {
  int n = 0;
  double h = 0.0;
  double margin = 0.0;  // containment margin around the cell boundary, >= 3h

  UnitCellGrid() = default;
  // margin < 0 selects the default max(3h, 0.02).
  explicit UnitCellGrid(int n_cells, double margin_width = -1.0);

  int nodes() const { return n + 1; }
  double coord(int i) const { return -0.5 + i * h; }
  Vec2 node(int i, int j) const { return {coord(i), coord(j)}; }
  int node_index(int i, int j) const { return j * (n + 1) + i; }
  int cell_index(int i, int j) const { return j * n + i; }
  Vec2 cell_center(int i, int j) const { return {-0.5 + (i + 0.5) * h, -0.5 + (j + 0.5) * h}; }

  bool operator==(const UnitCellGrid& o) const { return n == o.n && margin == o.margin; }
};

// Scalar field on grid nodes. Sign convention: Phi > 0 solid, Phi < 0 fluid,
// Phi = 0 the interface. Storage is row-major with y2 increasing by row.
struct LevelSetField {
  UnitCellGrid grid;
  std::vector<double> values;

  LevelSetField() = default;
  explicit LevelSetField(const UnitCellGrid& g) : grid(g), values(static_cast<std::size_t>(g.nodes()) * g.nodes(), 0.0) {}

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(grid.node_index(i, j))]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(grid.node_index(i, j))]; }

  // Bilinear interpolation; y is clamped to the closed cell.
  double interp(Vec2 y) const;

  // Central differences in the interior, one-sided at the boundary.
  Vec2 grad_at_node(int i, int j) const;

  // Bilinear interpolation of the nodal gradient field.
  Vec2 grad_interp(Vec2 y) const;
};

// Signed-distance-like field for a solid disk of radius r centered at c.
// Phi(y) = r - |y - c| away from the center; inside |y - c| < r/2 the cone is
// replaced by a quadratic cap matching value and slope at |y - c| = r/2 so the
// field is twice differentiable at the center.
// Throws DegeneracyError("invalid-geometry") unless r + margin < 1/2.
LevelSetField circle_levelset(double r, const UnitCellGrid& grid, Vec2 center = {0.0, 0.0});

// Nodewise max: solid set is the union of the operands' solid sets.
LevelSetField union_levelset(const LevelSetField& a, const LevelSetField& b);

// Fluid area fraction of cell (i, j) under the per-cell linear interface
// reconstruction (exact for the reconstruction; saddle connectivity follows
// the cell-average sign).
double cell_fluid_fraction(const LevelSetField& phi, int i, int j);

// Fluid volume fraction of the cell, in [0, 1]. All-solid input yields 0 and
// a one-line warning on std::clog.
double porosity(const LevelSetField& phi);

// Validity: solid set clear of the margin band, and |grad Phi| >= 0.5 at the
// center of every interface-crossed cell. Throws DegeneracyError on failure.
void validate_levelset(const LevelSetField& phi, const char* what = "level-set field");

// True if some cell changes sign (interface present).
bool has_interface(const LevelSetField& phi);

}  // namespace poroscale
