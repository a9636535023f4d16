#pragma once

#include <array>
#include <vector>

#include "poroscale/geometry.hpp"
#include "poroscale/tensor.hpp"

namespace poroscale {

struct DiffusionOptions {
  double eps = 1e-6;        // coefficient in the solid (penalization)
  double tol = 1e-10;       // CG relative residual
  int max_iter_factor = 20; // iteration cap = factor * n^2
};

// Periodic corrector problems div(kappa grad(zeta_j + y_j)) = 0 on the unit
// cell with kappa = 1 in the fluid and eps in the solid (fictitious-domain
// penalization), cell-centered finite volumes with harmonic face averaging.
struct DiffusionCellSolution {
  UnitCellGrid grid;
  std::array<std::vector<double>, 2> zeta;  // cell-centered correctors, fluid mean zero
  std::vector<double> theta;                // fluid area fraction per cell
  std::vector<double> kappa;                // coefficient per cell
  double eps = 0.0;
  double phi = 0.0;  // sum(theta) h^2
  std::array<int, 2> iters{};
  std::array<double, 2> rel_residual{};

  EffectiveTensor D;  // flux-form quadrature, symmetrized
  Mat2 D_raw;

  // Independent pointwise quadrature (central cell-difference gradients,
  // fluid-fraction weighted); used as a cross-check, O(h) from D.
  Mat2 pointwise_tensor() const;

  // Fluid-fraction weighted mean of a cell field.
  double fluid_mean(const std::vector<double>& cell_values) const;
};

DiffusionCellSolution solve_diffusion_cell(const LevelSetField& phi, const DiffusionOptions& opt = {});

// Effective diffusion tensor of a solution (already stored; kept as the
// operation named by the interface).
inline EffectiveTensor diffusion_tensor(const DiffusionCellSolution& sol) { return sol.D; }

}  // namespace poroscale
