#pragma once

#include <array>
#include <vector>

#include "poroscale/geometry.hpp"
#include "poroscale/tensor.hpp"

namespace poroscale {

struct StokesOptions {
  double eta = 1e-8;      // Brinkman penalization (solid drag 1/eta)
  double div_tol = 1e-8;  // max-norm divergence over fluid cells
  int max_outer = 50000;
  double inner_tol_floor = 1e-12;  // momentum CG relative residual
};

// Periodic Stokes unit-cell problems -Lap(omega_j) + grad(pi_j) = theta e_j,
// div omega_j = 0 on a staggered MAC grid; no-slip on the interface enforced
// by Brinkman drag on solid faces. Uzawa-type outer iteration: CG on the
// pressure Schur complement, diagonal Schur preconditioner, inner CG
// momentum solves.
struct StokesCellSolution {
  UnitCellGrid grid;
  double eta = 0.0;

  // Per driving direction j: u at vertical faces, v at horizontal faces,
  // p at cell centers (all n*n, periodic).
  std::array<std::vector<double>, 2> u, v, p;

  std::vector<double> theta;  // cell fluid fractions

  std::array<int, 2> outer_iters{};
  std::array<double, 2> div_max{};          // over fluid cells at termination
  std::array<double, 2> dissipation{};      // h^2 U^T A U (viscous + drag)
  std::array<double, 2> viscous_energy{};   // h^2 U^T (-Lap) U, info only
  double max_solid_speed = 0.0;             // max |velocity| on fully solid faces

  EffectiveTensor K;
  Mat2 K_raw;
};

StokesCellSolution solve_stokes_cell(const LevelSetField& phi, const StokesOptions& opt = {});

inline EffectiveTensor permeability_tensor(const StokesCellSolution& sol) { return sol.K; }

}  // namespace poroscale
