#pragma once

// Internal Q1 rectangle-grid kernels shared by the macro solvers: 9-point
// node stencils, element stiffness with cellwise-constant tensors, matrix
// application, Dirichlet elimination and Jacobi-preconditioned CG.

#include <array>
#include <vector>

#include "poroscale/darcy.hpp"
#include "poroscale/vec2.hpp"

namespace poroscale::q1 {

// Offset index (dj + 1) * 3 + (di + 1) into the 3x3 node neighborhood.
using Stencil = std::array<double, 9>;

// Assembles per-node stencils for -div(T grad u) with T constant per cell,
// 2x2 Gauss quadrature (exact for bilinear elements).
std::vector<Stencil> stiffness(const MacroGrid& g, const std::vector<Mat2>& tensor);

void apply(const MacroGrid& g, const std::vector<Stencil>& A, const std::vector<double>& x,
           std::vector<double>& y);

double dot(const std::vector<double>& a, const std::vector<double>& b);

// Marks nodes on Dirichlet edges with the per-edge constant; shared corners
// take the later edge in the fixed order left, right, bottom, top.
void tag_dirichlet(const MacroGrid& g, const std::array<double, 4>& per_edge, std::vector<char>& mask,
                   std::vector<double>& value);

// Symmetric elimination: identity rows at marked nodes, neighbor right-hand
// sides lifted by the pinned values, b set to the value at the node itself.
void eliminate_dirichlet(const MacroGrid& g, std::vector<Stencil>& A, std::vector<double>& b,
                         const std::vector<char>& mask, const std::vector<double>& value);

struct CgResult {
  int iters = 0;
  double rel_residual = 0.0;
};

// Solves A x = b to a relative residual; x carries the initial guess. Throws
// SolverError tagged with `what` on iteration exhaustion or lost definiteness.
CgResult jacobi_cg(const MacroGrid& g, const std::vector<Stencil>& A, const std::vector<double>& b,
                   std::vector<double>& x, double tol, int max_iter, const char* what);

}  // namespace poroscale::q1
