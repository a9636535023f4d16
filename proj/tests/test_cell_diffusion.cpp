#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poroscale/cell_diffusion.hpp"
#include "poroscale/diffeo.hpp"
#include "poroscale/errors.hpp"
#include "poroscale/geometry.hpp"

using namespace poroscale;

namespace {

constexpr double kPi = 3.14159265358979323846;

double tensor_diff(const Mat2& a, const Mat2& b) {
  return std::max(std::max(std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12)),
                  std::max(std::abs(a.a21 - b.a21), std::abs(a.a22 - b.a22)));
}

}  // namespace

TEST_CASE("all-fluid cell: correctors vanish, tensor is the identity") {
  const UnitCellGrid g(32);
  LevelSetField fluid(g);
  for (double& v : fluid.values) v = -1.0;
  const DiffusionCellSolution sol = solve_diffusion_cell(fluid);
  CHECK(sol.phi == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(sol.D.m.a11 - 1.0) < 1e-8);
  CHECK(std::abs(sol.D.m.a22 - 1.0) < 1e-8);
  CHECK(std::abs(sol.D.m.a12) < 1e-8);
  for (int d = 0; d < 2; ++d)
    for (double z : sol.zeta[static_cast<std::size_t>(d)]) CHECK(std::abs(z) < 1e-8);
}

TEST_CASE("disk obstacle: isotropy, bounds, symmetry, zero fluid mean") {
  const UnitCellGrid g(128);
  const DiffusionCellSolution sol = solve_diffusion_cell(circle_levelset(0.3, g));
  const double phi = 1.0 - kPi * 0.09;
  CHECK(sol.phi == doctest::Approx(phi).epsilon(5e-3));

  // Fourfold symmetry of the geometry: diagonal tensor with equal entries.
  CHECK(std::abs(sol.D.m.a11 - sol.D.m.a22) < 1e-3);
  CHECK(std::abs(sol.D.m.a12) < 1e-3);

  // Obstacles only hinder diffusion, and the variational bound caps it.
  CHECK(sol.D.m.a11 < sol.phi + 1e-3);
  CHECK(sol.D.m.a22 < sol.phi + 1e-3);
  CHECK(sol.D.m.a11 > 0.5 * sol.phi);
  CHECK(sol.D.lambda_min() > 0.0);

  // Flux-form quadrature is exactly symmetric; the report keeps the raw gap.
  CHECK(sol.D.asym < 1e-12 * (std::abs(sol.D.m.a11) + std::abs(sol.D.m.a22)));

  for (int d = 0; d < 2; ++d)
    CHECK(std::abs(sol.fluid_mean(sol.zeta[static_cast<std::size_t>(d)])) < 1e-10);
}

TEST_CASE("asymmetric geometry keeps the tensor symmetric") {
  const UnitCellGrid g(96);
  const LevelSetField f = union_levelset(circle_levelset(0.14, g, {-0.13, -0.07}),
                                         circle_levelset(0.21, g, {0.12, 0.11}));
  const DiffusionCellSolution sol = solve_diffusion_cell(f);
  CHECK(sol.D.asym < 1e-6 * (std::abs(sol.D.m.a11) + std::abs(sol.D.m.a22)));
  CHECK(sol.D.m.a11 < sol.phi + 1e-3);
  CHECK(sol.D.m.a22 < sol.phi + 1e-3);
  CHECK(sol.D.lambda_min() > 0.0);
}

TEST_CASE("grid convergence of the tensor") {
  Mat2 prev{};
  double d_coarse = 0.0;
  for (int n : {64, 128, 256}) {
    const DiffusionCellSolution sol = solve_diffusion_cell(circle_levelset(0.3, UnitCellGrid(n)));
    if (n == 128) d_coarse = tensor_diff(sol.D.m, prev);
    if (n == 256) {
      const double d_fine = tensor_diff(sol.D.m, prev);
      CHECK(d_fine < d_coarse);
      CHECK(d_coarse / d_fine > 1.5);  // first-order shrinkage
    }
    prev = sol.D.m;
  }
}

TEST_CASE("penalization limit: tensor is Cauchy in eps") {
  const UnitCellGrid g(64);
  const LevelSetField f = circle_levelset(0.3, g);
  Mat2 d4, d5, d6;
  {
    DiffusionOptions o;
    o.eps = 1e-4;
    d4 = solve_diffusion_cell(f, o).D.m;
    o.eps = 1e-5;
    d5 = solve_diffusion_cell(f, o).D.m;
    o.eps = 1e-6;
    d6 = solve_diffusion_cell(f, o).D.m;
  }
  const double gap45 = tensor_diff(d4, d5);
  const double gap56 = tensor_diff(d5, d6);
  CHECK(gap56 < gap45 / 3.0);
  CHECK(gap56 < 1e-4);
}

TEST_CASE("identity-transported geometry gives the identical tensor") {
  const UnitCellGrid g(128);
  const LevelSetField f = circle_levelset(0.3, g);
  DiffeoMap id;
  id.eval = [](Vec2 y) { return y; };
  id.jac = [](Vec2) { return Mat2::identity(); };
  const LevelSetField f2 = pullback(id, f);
  const DiffusionCellSolution a = solve_diffusion_cell(f);
  const DiffusionCellSolution b = solve_diffusion_cell(f2);
  CHECK(tensor_diff(a.D.m, b.D.m) < 1e-9);
  CHECK(a.iters[0] == b.iters[0]);
}

TEST_CASE("pointwise quadrature cross-checks the flux form") {
  const UnitCellGrid g(128);
  const DiffusionCellSolution sol = solve_diffusion_cell(circle_levelset(0.3, g));
  const Mat2 pw = sol.pointwise_tensor();
  // Different quadratures of the same correctors: O(h) apart near the
  // interface, not a solver-accuracy comparison.
  CHECK(tensor_diff(pw, sol.D.m) < 0.02);
  CHECK(pw.a11 == doctest::Approx(sol.D.m.a11).epsilon(0.03));
  CHECK(pw.a22 == doctest::Approx(sol.D.m.a22).epsilon(0.03));
}

TEST_CASE("solver diagnostics are populated") {
  const UnitCellGrid g(64);
  const DiffusionCellSolution sol = solve_diffusion_cell(circle_levelset(0.3, g));
  CHECK(sol.iters[0] > 10);
  CHECK(sol.iters[1] > 10);
  CHECK(sol.rel_residual[0] <= 1e-10);
  CHECK(sol.rel_residual[1] <= 1e-10);
  CHECK(sol.eps == 1e-6);
}

TEST_CASE("invalid geometry is rejected before solving") {
  const UnitCellGrid g(64);
  LevelSetField bad(g);
  for (int j = 0; j <= g.n; ++j)
    for (int i = 0; i <= g.n; ++i) bad.at(i, j) = 0.48 - std::abs(g.coord(i));
  CHECK_THROWS_AS(solve_diffusion_cell(bad), DegeneracyError);
}
