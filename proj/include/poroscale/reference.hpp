#pragma once

// Plain serial counterparts of the OpenMP kernels. They share no code with
// the parallel paths on purpose: tests compare the two routes, and the bench
// target times them against each other.

#include <vector>

#include "poroscale/geometry.hpp"
#include "poroscale/interface_curve.hpp"

namespace poroscale {
namespace serial_ref {

double porosity(const LevelSetField& phi);

LevelSetField signed_distance_field(const UnitCellGrid& grid, const InterfacePolyline& poly);

double dot(const std::vector<double>& a, const std::vector<double>& b);

// Periodic 5-point variable-coefficient stencil y = A x (same layout as the
// diffusion cell operator: fx east faces, fy north faces).
void periodic_stencil_apply(int n, const std::vector<double>& fx, const std::vector<double>& fy,
                            const std::vector<double>& x, std::vector<double>& y);

}  // namespace serial_ref
}  // namespace poroscale
