#include "poroscale/cell_stokes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcg.hpp"
#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"

namespace poroscale {

namespace {

// Periodic 5-point Helmholtz operator (-Lap + alpha) on one MAC component.
struct MomentumOp {
  int n;
  double inv_h2;
  const std::vector<double>& alpha;

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    par_for(static_cast<std::ptrdiff_t>(n) * n, [&](std::ptrdiff_t k) {
      const int j = static_cast<int>(k) / n;
      const int i = static_cast<int>(k) % n;
      const int ie = i + 1 == n ? 0 : i + 1;
      const int iw = i == 0 ? n - 1 : i - 1;
      const int jn = j + 1 == n ? 0 : j + 1;
      const int js = j == 0 ? n - 1 : j - 1;
      const double xc = x[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(k)] =
          inv_h2 * (4.0 * xc - x[static_cast<std::size_t>(j * n + ie)] - x[static_cast<std::size_t>(j * n + iw)] -
                    x[static_cast<std::size_t>(jn * n + i)] - x[static_cast<std::size_t>(js * n + i)]) +
          alpha[static_cast<std::size_t>(k)] * xc;
    });
  }
};

}  // namespace

StokesCellSolution solve_stokes_cell(const LevelSetField& phi, const StokesOptions& opt) {
  validate_levelset(phi, "permeability cell geometry");
  const int n = phi.grid.n;
  const double h = phi.grid.h;
  const double inv_h = 1.0 / h;
  const double inv_h2 = inv_h * inv_h;
  const std::ptrdiff_t cells = static_cast<std::ptrdiff_t>(n) * n;
  const std::size_t sz = static_cast<std::size_t>(cells);

  StokesCellSolution sol;
  sol.grid = phi.grid;
  sol.eta = opt.eta;
  sol.theta.resize(sz);
  par_for(cells, [&](std::ptrdiff_t k) {
    sol.theta[static_cast<std::size_t>(k)] = cell_fluid_fraction(phi, static_cast<int>(k) % n, static_cast<int>(k) / n);
  });

  // Face fluid fractions weight the load and the momentum quadrature; the
  // Brinkman drag is the sharp solid indicator sampled at face centers, so
  // faces in the fluid carry no artificial drag and the energy identity gap
  // against the viscous part alone stays O(eta).
  std::vector<double> theta_u(sz), theta_v(sz), alpha_u(sz), alpha_v(sz);
  const double drag = 1.0 / opt.eta;
  par_for(cells, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    const int iw = i == 0 ? n - 1 : i - 1;
    const int js = j == 0 ? n - 1 : j - 1;
    const double tu = 0.5 * (sol.theta[static_cast<std::size_t>(j * n + iw)] + sol.theta[static_cast<std::size_t>(k)]);
    const double tv = 0.5 * (sol.theta[static_cast<std::size_t>(js * n + i)] + sol.theta[static_cast<std::size_t>(k)]);
    theta_u[static_cast<std::size_t>(k)] = tu;
    theta_v[static_cast<std::size_t>(k)] = tv;
    const Vec2 cu{phi.grid.coord(i), -0.5 + (j + 0.5) * h};  // west face center
    const Vec2 cv{-0.5 + (i + 0.5) * h, phi.grid.coord(j)};  // south face center
    alpha_u[static_cast<std::size_t>(k)] = phi.interp(cu) > 0.0 ? drag : 0.0;
    alpha_v[static_cast<std::size_t>(k)] = phi.interp(cv) > 0.0 ? drag : 0.0;
  });
  const double alpha_max = std::max(par_max(cells, [&](std::ptrdiff_t k) { return alpha_u[static_cast<std::size_t>(k)]; }),
                                    par_max(cells, [&](std::ptrdiff_t k) { return alpha_v[static_cast<std::size_t>(k)]; }));
  if (alpha_max == 0.0)
    throw DegeneracyError("no-solution",
                          "all-fluid cell: periodic Stokes with uniform forcing has no steady state");

  const MomentumOp Au{n, inv_h2, alpha_u};
  const MomentumOp Av{n, inv_h2, alpha_v};
  std::vector<double> diag_u(sz), diag_v(sz);
  par_for(cells, [&](std::ptrdiff_t k) {
    diag_u[static_cast<std::size_t>(k)] = 4.0 * inv_h2 + alpha_u[static_cast<std::size_t>(k)];
    diag_v[static_cast<std::size_t>(k)] = 4.0 * inv_h2 + alpha_v[static_cast<std::size_t>(k)];
  });

  // Diagonal Schur estimate d_S = B diag(A)^-1 B^T per cell.
  std::vector<double> schur_diag(sz);
  par_for(cells, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    const int ie = i + 1 == n ? 0 : i + 1;
    const int jn = j + 1 == n ? 0 : j + 1;
    schur_diag[static_cast<std::size_t>(k)] =
        inv_h2 * (1.0 / diag_u[static_cast<std::size_t>(k)] + 1.0 / diag_u[static_cast<std::size_t>(j * n + ie)] +
                  1.0 / diag_v[static_cast<std::size_t>(k)] + 1.0 / diag_v[static_cast<std::size_t>(jn * n + i)]);
  });

  const double theta_total = par_sum(cells, [&](std::ptrdiff_t k) { return sol.theta[static_cast<std::size_t>(k)]; });

  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double>& u = sol.u[static_cast<std::size_t>(dir)];
    std::vector<double>& v = sol.v[static_cast<std::size_t>(dir)];
    std::vector<double>& p = sol.p[static_cast<std::size_t>(dir)];
    u.assign(sz, 0.0);
    v.assign(sz, 0.0);
    p.assign(sz, 0.0);

    // Fluid-fraction weighted body force.
    std::vector<double> fu(sz, 0.0), fv(sz, 0.0);
    if (dir == 0)
      par_for(cells, [&](std::ptrdiff_t k) { fu[static_cast<std::size_t>(k)] = theta_u[static_cast<std::size_t>(k)]; });
    else
      par_for(cells, [&](std::ptrdiff_t k) { fv[static_cast<std::size_t>(k)] = theta_v[static_cast<std::size_t>(k)]; });

    std::vector<double> rhs_u(sz), rhs_v(sz), div(sz);
    auto precond_u = [&](const std::vector<double>& r, std::vector<double>& z) {
      par_for(cells, [&](std::ptrdiff_t k) {
        z[static_cast<std::size_t>(k)] = r[static_cast<std::size_t>(k)] / diag_u[static_cast<std::size_t>(k)];
      });
    };
    auto precond_v = [&](const std::vector<double>& r, std::vector<double>& z) {
      par_for(cells, [&](std::ptrdiff_t k) {
        z[static_cast<std::size_t>(k)] = r[static_cast<std::size_t>(k)] / diag_v[static_cast<std::size_t>(k)];
      });
    };
    auto matvec_u = [&](const std::vector<double>& x, std::vector<double>& y) { Au.apply(x, y); };
    auto matvec_v = [&](const std::vector<double>& x, std::vector<double>& y) { Av.apply(x, y); };
    const int momentum_cap = 40 * n * n;
    const double inner_tol = opt.inner_tol_floor;

    // grad: cell scalar -> face components (B^T); bdiv: faces -> cell scalar.
    auto grad = [&](const std::vector<double>& s, std::vector<double>& gx, std::vector<double>& gy) {
      par_for(cells, [&](std::ptrdiff_t k) {
        const int j = static_cast<int>(k) / n;
        const int i = static_cast<int>(k) % n;
        const int iw = i == 0 ? n - 1 : i - 1;
        const int js = j == 0 ? n - 1 : j - 1;
        gx[static_cast<std::size_t>(k)] =
            inv_h * (s[static_cast<std::size_t>(k)] - s[static_cast<std::size_t>(j * n + iw)]);
        gy[static_cast<std::size_t>(k)] =
            inv_h * (s[static_cast<std::size_t>(k)] - s[static_cast<std::size_t>(js * n + i)]);
      });
    };
    auto bdiv = [&](const std::vector<double>& wx, const std::vector<double>& wy, std::vector<double>& out) {
      par_for(cells, [&](std::ptrdiff_t k) {
        const int j = static_cast<int>(k) / n;
        const int i = static_cast<int>(k) % n;
        const int ie = i + 1 == n ? 0 : i + 1;
        const int jn = j + 1 == n ? 0 : j + 1;
        out[static_cast<std::size_t>(k)] =
            inv_h * (wx[static_cast<std::size_t>(j * n + ie)] - wx[static_cast<std::size_t>(k)] +
                     wy[static_cast<std::size_t>(jn * n + i)] - wy[static_cast<std::size_t>(k)]);
      });
    };
    auto remove_mean = [&](std::vector<double>& s) {
      const double mean =
          par_sum(cells, [&](std::ptrdiff_t k) { return s[static_cast<std::size_t>(k)]; }) / static_cast<double>(cells);
      par_for(cells, [&](std::ptrdiff_t k) { s[static_cast<std::size_t>(k)] -= mean; });
    };
    auto fluid_div_max = [&](const std::vector<double>& d) {
      return par_max(cells, [&](std::ptrdiff_t k) {
        return sol.theta[static_cast<std::size_t>(k)] > 0.0 ? std::abs(d[static_cast<std::size_t>(k)]) : 0.0;
      });
    };

    // Momentum solve for the zero-pressure state.
    CGResult cu = pcg(matvec_u, precond_u, fu, u, inner_tol, momentum_cap);
    CGResult cv = pcg(matvec_v, precond_v, fv, v, inner_tol, momentum_cap);
    if (!cu.converged || !cv.converged)
      throw SolverError("solver-failure", "Stokes momentum CG stalled on the initial solve");

    // CG on the pressure Schur complement S = G^T A^-1 G (G the face
    // gradient; discrete div = -G^T, so S q = -div(A^-1 G q)), SPD on
    // mean-free pressures, preconditioned by the diagonal of G^T diag(A)^-1 G.
    // The velocity tracks the pressure iterate incrementally: u(p + a q) =
    // u(p) - a A^-1 G q.
    std::vector<double> r(sz), z(sz), q(sz), sq(sz), wu(sz, 0.0), wv(sz, 0.0), gqu(sz), gqv(sz);
    bdiv(u, v, r);
    par_for(cells, [&](std::ptrdiff_t k) { r[static_cast<std::size_t>(k)] = -r[static_cast<std::size_t>(k)]; });
    remove_mean(r);
    double res_fluid = fluid_div_max(r);
    int outer = 0;
    if (res_fluid > opt.div_tol) {
      auto apply_precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        par_for(cells, [&](std::ptrdiff_t k) {
          zz[static_cast<std::size_t>(k)] = rr[static_cast<std::size_t>(k)] / schur_diag[static_cast<std::size_t>(k)];
        });
        remove_mean(zz);
      };
      apply_precond(r, z);
      q = z;
      double rz = dot_det(r, z);
      for (; outer < opt.max_outer; ++outer) {
        grad(q, gqu, gqv);
        wu.assign(sz, 0.0);
        wv.assign(sz, 0.0);
        cu = pcg(matvec_u, precond_u, gqu, wu, inner_tol, momentum_cap);
        cv = pcg(matvec_v, precond_v, gqv, wv, inner_tol, momentum_cap);
        if (!cu.converged || !cv.converged)
          throw SolverError("solver-failure", "Stokes momentum CG stalled in outer sweep " + std::to_string(outer));
        bdiv(wu, wv, sq);
        par_for(cells, [&](std::ptrdiff_t k) { sq[static_cast<std::size_t>(k)] = -sq[static_cast<std::size_t>(k)]; });
        const double qsq = dot_det(q, sq);
        if (!(qsq > 0.0))
          throw SolverError("solver-failure",
                            "pressure Schur complement lost definiteness: outer=" + std::to_string(outer) +
                                " qsq=" + std::to_string(qsq) + " rz=" + std::to_string(rz) +
                                " res=" + std::to_string(res_fluid) + " inner_iters=(" + std::to_string(cu.iters) +
                                "," + std::to_string(cv.iters) + ") inner_res=(" + std::to_string(cu.rel_residual) +
                                "," + std::to_string(cv.rel_residual) + ")");
        const double a = rz / qsq;
        par_for(cells, [&](std::ptrdiff_t k) {
          const std::size_t kk = static_cast<std::size_t>(k);
          p[kk] += a * q[kk];
          u[kk] -= a * wu[kk];
          v[kk] -= a * wv[kk];
          r[kk] -= a * sq[kk];
        });
        res_fluid = fluid_div_max(r);
        if (res_fluid <= 0.5 * opt.div_tol) break;
        apply_precond(r, z);
        const double rz_new = dot_det(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        par_for(cells, [&](std::ptrdiff_t k) {
          q[static_cast<std::size_t>(k)] = z[static_cast<std::size_t>(k)] + beta * q[static_cast<std::size_t>(k)];
        });
      }
    }

    // Tight momentum re-solve at the final pressure; the reported divergence
    // is computed from this velocity, not the incrementally tracked one.
    par_for(cells, [&](std::ptrdiff_t k) {
      const int j = static_cast<int>(k) / n;
      const int i = static_cast<int>(k) % n;
      const int iw = i == 0 ? n - 1 : i - 1;
      const int js = j == 0 ? n - 1 : j - 1;
      rhs_u[static_cast<std::size_t>(k)] =
          fu[static_cast<std::size_t>(k)] -
          inv_h * (p[static_cast<std::size_t>(k)] - p[static_cast<std::size_t>(j * n + iw)]);
      rhs_v[static_cast<std::size_t>(k)] =
          fv[static_cast<std::size_t>(k)] -
          inv_h * (p[static_cast<std::size_t>(k)] - p[static_cast<std::size_t>(js * n + i)]);
    });
    cu = pcg(matvec_u, precond_u, rhs_u, u, inner_tol, momentum_cap);
    cv = pcg(matvec_v, precond_v, rhs_v, v, inner_tol, momentum_cap);
    if (!cu.converged || !cv.converged)
      throw SolverError("solver-failure", "Stokes momentum CG stalled on the final solve");
    bdiv(u, v, div);
    res_fluid = fluid_div_max(div);
    if (res_fluid > opt.div_tol)
      throw SolverError("solver-failure",
                        "pressure iteration failed to reach divergence tolerance: residual " +
                            std::to_string(res_fluid));
    sol.outer_iters[static_cast<std::size_t>(dir)] = outer + 1;
    sol.div_max[static_cast<std::size_t>(dir)] = res_fluid;

    // Pin the pressure to zero fluid mean.
    const double p_mean = par_sum(cells, [&](std::ptrdiff_t k) {
                            return sol.theta[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
                          }) /
                          theta_total;
    par_for(cells, [&](std::ptrdiff_t k) { p[static_cast<std::size_t>(k)] -= p_mean; });

    // Discrete dissipation h^2 U^T A U (exact energy identity counterpart)
    // and the viscous part alone for reporting.
    std::vector<double> tmp(sz);
    Au.apply(u, tmp);
    double dissip = h * h * dot_det(u, tmp);
    Av.apply(v, tmp);
    dissip += h * h * dot_det(v, tmp);
    sol.dissipation[static_cast<std::size_t>(dir)] = dissip;
    double visc = dissip - h * h *
                               par_sum(cells, [&](std::ptrdiff_t k) {
                                 return alpha_u[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)] *
                                            u[static_cast<std::size_t>(k)] +
                                        alpha_v[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)] *
                                            v[static_cast<std::size_t>(k)];
                               });
    sol.viscous_energy[static_cast<std::size_t>(dir)] = visc;
  }

  // Momentum integrals with fluid-fraction weights: K_ij = int_P omega_j^i.
  auto face_integral = [&](const std::vector<double>& w, const std::vector<double>& tf) {
    return h * h * par_sum(cells, [&](std::ptrdiff_t k) {
             return tf[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k)];
           });
  };
  Mat2 K{};
  K.a11 = face_integral(sol.u[0], theta_u);
  K.a12 = face_integral(sol.u[1], theta_u);
  K.a21 = face_integral(sol.v[0], theta_v);
  K.a22 = face_integral(sol.v[1], theta_v);
  sol.K_raw = K;
  sol.K = EffectiveTensor::from_raw(K);

  // Velocity magnitude on fully solid faces.
  double ms = 0.0;
  for (int dir = 0; dir < 2; ++dir) {
    ms = std::max(ms, par_max(cells, [&](std::ptrdiff_t k) {
           const double a = theta_u[static_cast<std::size_t>(k)] <= 1e-12
                                ? std::abs(sol.u[static_cast<std::size_t>(dir)][static_cast<std::size_t>(k)])
                                : 0.0;
           const double b = theta_v[static_cast<std::size_t>(k)] <= 1e-12
                                ? std::abs(sol.v[static_cast<std::size_t>(dir)][static_cast<std::size_t>(k)])
                                : 0.0;
           return std::max(a, b);
         }));
  }
  sol.max_solid_speed = ms;
  return sol;
}

}  // namespace poroscale
