#pragma once

#include <utility>
#include <vector>

#include "poroscale/geometry.hpp"
#include "poroscale/vec2.hpp"

namespace poroscale {

// Closed interface curves extracted from a level-set field. Vertices of loop
// k are vertices[loop_begin[k] .. loop_begin[k+1]) in traversal order; the
// last vertex connects back to the first.
struct InterfacePolyline {
  std::vector<Vec2> vertices;
  std::vector<int> loop_begin;  // size = loops + 1, loop_begin.front() = 0

  int loops() const { return static_cast<int>(loop_begin.size()) - 1; }
  int loop_size(int k) const { return loop_begin[k + 1] - loop_begin[k]; }
  bool empty() const { return vertices.empty(); }

  double length() const;

  // For each vertex its loop id (component id in serialized output).
  std::vector<int> component_ids() const;
};

// Marching squares with linear edge interpolation; ambiguous saddle cells are
// resolved by the cell-average sign. Open chains (interface touching the cell
// boundary) raise DegeneracyError("invalid-geometry").
InterfacePolyline extract_interface(const LevelSetField& phi);

// Interface length per unit cell (specific surface area in 2D).
double surface_area(const LevelSetField& phi);

// Max absolute curvature estimated from circumscribed circles of vertex
// triplets spaced `stride` vertices apart (wider stencils suppress the
// reconstruction jitter of marching-squares vertices).
double max_curvature(const InterfacePolyline& poly, int stride = 4);

// 1 / max|curvature|; infinite (huge) when the polyline has no usable triplet.
double tubular_radius(const InterfacePolyline& poly);

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);

// Min distance from p to the polyline and the parity of crossings of the
// horizontal ray {q : q.y = p.y, q.x > p.x}; odd parity means p is enclosed
// by an odd number of loops (solid side, since the far field is fluid).
struct DistanceParity {
  double distance;
  bool inside;
};
DistanceParity distance_and_parity(const Vec2& p, const InterfacePolyline& poly);

// Signed distance field to the polyline on the grid: positive inside (solid),
// negative outside (fluid). Parallel over nodes.
LevelSetField signed_distance_field(const UnitCellGrid& grid, const InterfacePolyline& poly);

// Symmetric Hausdorff distance between two polylines (vertices of one against
// segments of the other, both ways).
double hausdorff_distance(const InterfacePolyline& a, const InterfacePolyline& b);

}  // namespace poroscale
