// Prints fine-grid reference values and solver statistics used to freeze
// regression baselines in the test suite. Rerun after any solver change and
// update the frozen numbers deliberately.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "poroscale/cell_diffusion.hpp"
#include "poroscale/cell_stokes.hpp"
#include "poroscale/geometry.hpp"

using namespace poroscale;
using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int main(int argc, char** argv) {
  const bool stokes_only = argc > 1;  // any argument: skip the diffusion sweep
  std::printf("disk r = 0.3\n\n");

  const std::vector<int> diff_ns = stokes_only ? std::vector<int>{} : std::vector<int>{64, 128, 256, 512};
  for (int n : diff_ns) {
    const UnitCellGrid g(n);
    const LevelSetField f = circle_levelset(0.3, g);
    auto t0 = Clock::now();
    const DiffusionCellSolution sol = solve_diffusion_cell(f);
    const double dt = seconds_since(t0);
    std::printf("diffusion n=%4d  D11=%.12f D22=%.12f D12=%.3e  phi=%.12f  iters=(%d,%d)  %.2fs\n", n,
                sol.D.m.a11, sol.D.m.a22, sol.D.m.a12, sol.phi, sol.iters[0], sol.iters[1], dt);
  }
  std::printf("\n");

  StokesOptions sopt;
  if (argc > 1) sopt.eta = std::atof(argv[1]);
  std::printf("stokes eta = %.1e\n", sopt.eta);
  for (int n : {64, 96, 128}) {
    const UnitCellGrid g(n);
    const LevelSetField f = circle_levelset(0.3, g);
    auto t0 = Clock::now();
    const StokesCellSolution sol = solve_stokes_cell(f, sopt);
    const double dt = seconds_since(t0);
    std::printf(
        "stokes    n=%4d  K11=%.12e K22=%.12e K12=%.3e  outer=(%d,%d) div=(%.2e,%.2e)  diss=(%.6e,%.6e)  "
        "solid_u=%.2e  %.2fs\n",
        n, sol.K.m.a11, sol.K.m.a22, sol.K.m.a12, sol.outer_iters[0], sol.outer_iters[1], sol.div_max[0],
        sol.div_max[1], sol.dissipation[0], sol.dissipation[1], sol.max_solid_speed, dt);
    std::printf("          visc=(%.12e,%.12e)  drag_share=(%.3e,%.3e)\n", sol.viscous_energy[0],
                sol.viscous_energy[1], (sol.dissipation[0] - sol.viscous_energy[0]) / sol.K.m.a11,
                (sol.dissipation[1] - sol.viscous_energy[1]) / sol.K.m.a22);
  }
  return 0;
}
