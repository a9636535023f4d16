#include "poroscale/cell_diffusion.hpp"

#include <cmath>
#include <string>

#include "pcg.hpp"
#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"
#include "poroscale/stencil.hpp"

namespace poroscale {

namespace {

void remove_mean(std::vector<double>& v) {
  const double mean = par_sum(static_cast<std::ptrdiff_t>(v.size()),
                              [&](std::ptrdiff_t i) { return v[static_cast<std::size_t>(i)]; }) /
                      static_cast<double>(v.size());
  par_for(static_cast<std::ptrdiff_t>(v.size()), [&](std::ptrdiff_t i) { v[static_cast<std::size_t>(i)] -= mean; });
}

}  // namespace

double DiffusionCellSolution::fluid_mean(const std::vector<double>& cell_values) const {
  const double weighted = par_sum(static_cast<std::ptrdiff_t>(cell_values.size()), [&](std::ptrdiff_t i) {
    return theta[static_cast<std::size_t>(i)] * cell_values[static_cast<std::size_t>(i)];
  });
  const double w = par_sum(static_cast<std::ptrdiff_t>(theta.size()),
                           [&](std::ptrdiff_t i) { return theta[static_cast<std::size_t>(i)]; });
  return w > 0.0 ? weighted / w : 0.0;
}

DiffusionCellSolution solve_diffusion_cell(const LevelSetField& phi, const DiffusionOptions& opt) {
  validate_levelset(phi, "diffusion cell geometry");
  const int n = phi.grid.n;
  const double h = phi.grid.h;
  const std::ptrdiff_t cells = static_cast<std::ptrdiff_t>(n) * n;

  DiffusionCellSolution sol;
  sol.grid = phi.grid;
  sol.eps = opt.eps;
  sol.theta.resize(static_cast<std::size_t>(cells));
  sol.kappa.resize(static_cast<std::size_t>(cells));
  par_for(cells, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    const double th = cell_fluid_fraction(phi, i, j);
    sol.theta[static_cast<std::size_t>(k)] = th;
    sol.kappa[static_cast<std::size_t>(k)] = th + (1.0 - th) * opt.eps;
  });
  sol.phi = h * h *
            par_sum(cells, [&](std::ptrdiff_t k) { return sol.theta[static_cast<std::size_t>(k)]; });

  // Harmonic face averages of the cell coefficients.
  std::vector<double> fx(static_cast<std::size_t>(cells)), fy(static_cast<std::size_t>(cells));
  par_for(cells, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    const double kc = sol.kappa[static_cast<std::size_t>(k)];
    const double ke = sol.kappa[static_cast<std::size_t>(j * n + (i + 1 == n ? 0 : i + 1))];
    const double kn = sol.kappa[static_cast<std::size_t>((j + 1 == n ? 0 : j + 1) * n + i)];
    fx[static_cast<std::size_t>(k)] = 2.0 * kc * ke / (kc + ke);
    fy[static_cast<std::size_t>(k)] = 2.0 * kc * kn / (kc + kn);
  });

  std::vector<double> diag(static_cast<std::size_t>(cells));
  par_for(cells, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    const int iw = i == 0 ? n - 1 : i - 1;
    const int js = j == 0 ? n - 1 : j - 1;
    diag[static_cast<std::size_t>(k)] = fx[static_cast<std::size_t>(k)] + fx[static_cast<std::size_t>(j * n + iw)] +
                                        fy[static_cast<std::size_t>(k)] + fy[static_cast<std::size_t>(js * n + i)];
  });

  // Jacobi preconditioning projected onto zero-mean vectors (the periodic
  // operator has the constants as kernel; the right-hand sides are mean-free).
  auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
    par_for(cells, [&](std::ptrdiff_t k) {
      z[static_cast<std::size_t>(k)] = r[static_cast<std::size_t>(k)] / diag[static_cast<std::size_t>(k)];
    });
    remove_mean(z);
  };
  auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
    periodic_stencil_apply(n, fx, fy, x, y);
  };

  const int max_iters = opt.max_iter_factor * n * n;
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> b(static_cast<std::size_t>(cells));
    par_for(cells, [&](std::ptrdiff_t k) {
      const int j = static_cast<int>(k) / n;
      const int i = static_cast<int>(k) % n;
      // Gradient of the energy 1/2 sum_f kappa_f h^2 G_f^2 in zeta_c picks up
      // h (kappa_east - kappa_west) from the +1 in the face gradient.
      if (dir == 0) {
        const int iw = i == 0 ? n - 1 : i - 1;
        b[static_cast<std::size_t>(k)] =
            h * (fx[static_cast<std::size_t>(k)] - fx[static_cast<std::size_t>(j * n + iw)]);
      } else {
        const int js = j == 0 ? n - 1 : j - 1;
        b[static_cast<std::size_t>(k)] =
            h * (fy[static_cast<std::size_t>(k)] - fy[static_cast<std::size_t>(js * n + i)]);
      }
    });
    remove_mean(b);

    std::vector<double> x(static_cast<std::size_t>(cells), 0.0);
    const CGResult cg = pcg(matvec, precond, b, x, opt.tol, max_iters);
    if (!cg.converged)
      throw SolverError("solver-failure", "diffusion cell CG stalled at relative residual " +
                                              std::to_string(cg.rel_residual) + " (direction " +
                                              std::to_string(dir) + ")");
    sol.iters[static_cast<std::size_t>(dir)] = cg.iters;
    sol.rel_residual[static_cast<std::size_t>(dir)] = cg.rel_residual;

    // Fluid-mean-free corrector.
    std::vector<double>& zeta = sol.zeta[static_cast<std::size_t>(dir)];
    zeta = std::move(x);
    const double mean = sol.fluid_mean(zeta);
    par_for(cells, [&](std::ptrdiff_t k) { zeta[static_cast<std::size_t>(k)] -= mean; });
  }

  // Flux-form quadrature: D_ij = sum over faces of h^2 kappa_f G_f[i] G_f[j],
  // G the face-normal gradient of chi_k = zeta_k + y_k. Exactly symmetric.
  Mat2 D{};
  const std::vector<double>& z0 = sol.zeta[0];
  const std::vector<double>& z1 = sol.zeta[1];
  auto accumulate = [&](int comp_row, int comp_col) {
    return par_sum(cells, [&](std::ptrdiff_t k) {
      const int j = static_cast<int>(k) / n;
      const int i = static_cast<int>(k) % n;
      const int ie = i + 1 == n ? 0 : i + 1;
      const int jn = j + 1 == n ? 0 : j + 1;
      const std::size_t c = static_cast<std::size_t>(k);
      const std::size_t e = static_cast<std::size_t>(j * n + ie);
      const std::size_t nn = static_cast<std::size_t>(jn * n + i);
      // East face: normal direction 0.
      const double gx0 = (z0[e] - z0[c]) / h + 1.0;
      const double gx1 = (z1[e] - z1[c]) / h;
      // North face: normal direction 1.
      const double gy0 = (z0[nn] - z0[c]) / h;
      const double gy1 = (z1[nn] - z1[c]) / h + 1.0;
      const double gxr = comp_row == 0 ? gx0 : gx1;
      const double gxc = comp_col == 0 ? gx0 : gx1;
      const double gyr = comp_row == 0 ? gy0 : gy1;
      const double gyc = comp_col == 0 ? gy0 : gy1;
      return h * h * (fx[c] * gxr * gxc + fy[c] * gyr * gyc);
    });
  };
  D.a11 = accumulate(0, 0);
  D.a12 = accumulate(0, 1);
  D.a21 = accumulate(1, 0);
  D.a22 = accumulate(1, 1);
  sol.D_raw = D;
  sol.D = EffectiveTensor::from_raw(D);
  return sol;
}

Mat2 DiffusionCellSolution::pointwise_tensor() const {
  const int n = grid.n;
  const double h = grid.h;
  const std::ptrdiff_t cells = static_cast<std::ptrdiff_t>(n) * n;
  Mat2 D{};
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 2; ++col) {
      const std::vector<double>& z = zeta[static_cast<std::size_t>(col)];
      const double val = par_sum(cells, [&](std::ptrdiff_t k) {
        const int j = static_cast<int>(k) / n;
        const int i = static_cast<int>(k) % n;
        const int ie = i + 1 == n ? 0 : i + 1;
        const int iw = i == 0 ? n - 1 : i - 1;
        const int jn = j + 1 == n ? 0 : j + 1;
        const int js = j == 0 ? n - 1 : j - 1;
        const double grad = row == 0 ? (z[static_cast<std::size_t>(j * n + ie)] - z[static_cast<std::size_t>(j * n + iw)]) / (2.0 * h)
                                     : (z[static_cast<std::size_t>(jn * n + i)] - z[static_cast<std::size_t>(js * n + i)]) / (2.0 * h);
        const double delta = row == col ? 1.0 : 0.0;
        return theta[static_cast<std::size_t>(k)] * h * h * (grad + delta);
      });
      if (row == 0 && col == 0)
        D.a11 = val;
      else if (row == 0)
        D.a12 = val;
      else if (col == 0)
        D.a21 = val;
      else
        D.a22 = val;
    }
  }
  return D;
}

}  // namespace poroscale
