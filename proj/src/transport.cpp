#include "poroscale/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poroscale/errors.hpp"
#include "poroscale/parallel.hpp"
#include "q1_stencil.hpp"

namespace poroscale {

namespace {

std::vector<double> lumped_areas(const MacroGrid& g) {
  std::vector<double> m(static_cast<std::size_t>(g.nodes()), 0.0);
  const double q = 0.25 * g.hx() * g.hy();
  for (int cj = 0; cj < g.ny; ++cj)
    for (int ci = 0; ci < g.nx; ++ci) {
      m[static_cast<std::size_t>(g.node_index(ci, cj))] += q;
      m[static_cast<std::size_t>(g.node_index(ci + 1, cj))] += q;
      m[static_cast<std::size_t>(g.node_index(ci + 1, cj + 1))] += q;
      m[static_cast<std::size_t>(g.node_index(ci, cj + 1))] += q;
    }
  return m;
}

// Centered differences with one-sided closure at the domain edges.
Vec2 node_gradient(const MacroGrid& g, const std::vector<double>& F, int i, int j) {
  const int mx = g.nodes_x();
  const auto at = [&](int a, int b) { return F[static_cast<std::size_t>(b * mx + a)]; };
  double gx, gy;
  if (i == 0)
    gx = (at(1, j) - at(0, j)) / g.hx();
  else if (i == g.nx)
    gx = (at(i, j) - at(i - 1, j)) / g.hx();
  else
    gx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * g.hx());
  if (j == 0)
    gy = (at(i, 1) - at(i, 0)) / g.hy();
  else if (j == g.ny)
    gy = (at(i, j) - at(i, j - 1)) / g.hy();
  else
    gy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * g.hy());
  return {gx, gy};
}

void validate_step(const MacroGrid& g, const TransportState& st, double dt) {
  if (!(dt > 0.0)) throw ConfigError("transport-step", "dt must be positive");
  const std::size_t n = static_cast<std::size_t>(g.nodes());
  if (st.c.size() != n || st.phi.size() != n)
    throw ConfigError("transport-state", "state arrays do not match the grid");
}

void check_finite(const std::vector<double>& c, double t) {
  for (std::size_t k = 0; k < c.size(); ++k)
    if (!std::isfinite(c[k]))
      throw SolverError("nonfinite", "concentration overflow at node " + std::to_string(k) +
                                         ", t = " + std::to_string(t) + ", reduce dt");
}

struct LinearSystem {
  std::vector<q1::Stencil> S;
  std::vector<char> mask;
  std::vector<double> value;
  std::vector<double> shift;  // Dirichlet lift, added to interior entries of b
};

// (mass + dt stiffness) with Dirichlet rows eliminated once; the lift vector
// lets the right-hand side be rebuilt per Picard iterate without touching S.
LinearSystem implicit_system(const MacroGrid& g, const std::vector<Mat2>& cell_tensor,
                             const std::vector<double>& mass_diag, double dt, const TransportBC& bc) {
  LinearSystem sys;
  sys.S = q1::stiffness(g, cell_tensor);
  for (int k = 0; k < g.nodes(); ++k) {
    for (double& e : sys.S[static_cast<std::size_t>(k)]) e *= dt;
    sys.S[static_cast<std::size_t>(k)][4] += mass_diag[static_cast<std::size_t>(k)];
  }
  q1::tag_dirichlet(g, bc.c_dir, sys.mask, sys.value);
  sys.shift.assign(static_cast<std::size_t>(g.nodes()), 0.0);
  q1::eliminate_dirichlet(g, sys.S, sys.shift, sys.mask, sys.value);
  return sys;
}

// Dual-cell upwind budgets (net outflow per node); boundary_flux collects the
// domain-boundary face contributions so the telescoping sum can be audited.
std::vector<double> upwind_budgets(const MacroGrid& g, const std::vector<double>& c,
                                   const DarcyField& darcy, const TransportBC& bc,
                                   double* boundary_flux) {
  if (static_cast<int>(darcy.v.size()) != g.cells())
    throw ConfigError("darcy-field", "velocity field does not match the grid");
  std::vector<double> budget(static_cast<std::size_t>(g.nodes()), 0.0);
  const double hx = g.hx(), hy = g.hy();
  double bf = 0.0;
  const auto vat = [&](int ci, int cj) { return darcy.v[static_cast<std::size_t>(g.cell_index(ci, cj))]; };

  // Interior vertical faces between nodes (i, j) and (i + 1, j); each half
  // segment lies in one Darcy cell and carries that cell's velocity.
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t nl = static_cast<std::size_t>(g.node_index(i, j));
      const std::size_t nr = static_cast<std::size_t>(g.node_index(i + 1, j));
      const auto half = [&](int cj) {
        const double vx = vat(i, cj).x;
        if (vx == 0.0) return;
        const double donor = vx > 0.0 ? c[nl] : c[nr];
        const double flux = vx * donor * 0.5 * hy;
        budget[nl] += flux;
        budget[nr] -= flux;
      };
      if (j >= 1) half(j - 1);
      if (j <= g.ny - 1) half(j);
    }

  // Interior horizontal faces between nodes (i, j) and (i, j + 1).
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const std::size_t nb = static_cast<std::size_t>(g.node_index(i, j));
      const std::size_t nt = static_cast<std::size_t>(g.node_index(i, j + 1));
      const auto half = [&](int ci) {
        const double vy = vat(ci, j).y;
        if (vy == 0.0) return;
        const double donor = vy > 0.0 ? c[nb] : c[nt];
        const double flux = vy * donor * 0.5 * hx;
        budget[nb] += flux;
        budget[nt] -= flux;
      };
      if (i >= 1) half(i - 1);
      if (i <= g.nx - 1) half(i);
    }

  // Domain-boundary faces: outflow takes the node value, inflow the Dirichlet
  // value on Dirichlet edges and the node value otherwise.
  const auto boundary = [&](int edge, int node, double vn_out, double len) {
    if (vn_out == 0.0) return;
    const bool dirichlet = g.boundary[static_cast<std::size_t>(edge)] == EdgeKind::dirichlet;
    const double donor = vn_out > 0.0 ? c[static_cast<std::size_t>(node)]
                                      : (dirichlet ? bc.c_dir[static_cast<std::size_t>(edge)]
                                                   : c[static_cast<std::size_t>(node)]);
    const double flux = vn_out * donor * len;
    budget[static_cast<std::size_t>(node)] += flux;
    bf += flux;
  };
  for (int j = 0; j <= g.ny; ++j) {
    if (j >= 1) boundary(0, g.node_index(0, j), -vat(0, j - 1).x, 0.5 * hy);
    if (j <= g.ny - 1) boundary(0, g.node_index(0, j), -vat(0, j).x, 0.5 * hy);
    if (j >= 1) boundary(1, g.node_index(g.nx, j), vat(g.nx - 1, j - 1).x, 0.5 * hy);
    if (j <= g.ny - 1) boundary(1, g.node_index(g.nx, j), vat(g.nx - 1, j).x, 0.5 * hy);
  }
  for (int i = 0; i <= g.nx; ++i) {
    if (i >= 1) boundary(2, g.node_index(i, 0), -vat(i - 1, 0).y, 0.5 * hx);
    if (i <= g.nx - 1) boundary(2, g.node_index(i, 0), -vat(i, 0).y, 0.5 * hx);
    if (i >= 1) boundary(3, g.node_index(i, g.ny), vat(i - 1, g.ny - 1).y, 0.5 * hx);
    if (i <= g.nx - 1) boundary(3, g.node_index(i, g.ny), vat(i, g.ny - 1).y, 0.5 * hx);
  }

  if (boundary_flux) *boundary_flux = bf;
  return budget;
}

// Shared body of step_partial and step_advective; the advective variant adds
// the precomputed upwind term so a vanishing velocity reproduces the
// diffusive step bit for bit.
TransportState partial_step_impl(const MacroGrid& grid, const TransportState& state, const SField& s_field,
                                 const ParameterTable& table, const ReactionRate& rate, const TransportBC& bc,
                                 double dt, const TransportOptions& opt, StepReport* report,
                                 const std::vector<double>* advective_div) {
  validate_step(grid, state, dt);
  if (!rate.f) throw ConfigError("reaction-rate", "rate function not set");
  if (!s_field) throw ConfigError("s-field", "order parameter not set");

  const int N = grid.nodes();
  const int mx = grid.nodes_x();
  const double t_new = state.t + dt;
  const double delta = table.delta();

  std::vector<double> phi_new(static_cast<std::size_t>(N)), dtphi(static_cast<std::size_t>(N)),
      sig(static_cast<std::size_t>(N));
  std::vector<Mat2> Dn(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    const int i = k % mx, j = k / mx;
    const Vec2 x{i * grid.hx(), j * grid.hy()};
    const double phi_old = table.phi_at(s_field(state.t, x));
    const EffectiveParams ep = table.interpolate(s_field(t_new, x));
    if (ep.phi < delta || ep.phi > 1.0 - delta)
      throw DegeneracyError("band", "phi = " + std::to_string(ep.phi) + " at node " + std::to_string(k) +
                                        ", t = " + std::to_string(t_new) + " leaves the band [" +
                                        std::to_string(delta) + ", " + std::to_string(1.0 - delta) + "]");
    phi_new[static_cast<std::size_t>(k)] = ep.phi;
    sig[static_cast<std::size_t>(k)] = ep.sigma;
    Dn[static_cast<std::size_t>(k)] = ep.D;
    dtphi[static_cast<std::size_t>(k)] = (ep.phi - phi_old) / dt;
  }

  std::vector<Mat2> acell(static_cast<std::size_t>(grid.cells()));
  for (int cj = 0; cj < grid.ny; ++cj)
    for (int ci = 0; ci < grid.nx; ++ci) {
      const Vec2 xc{(ci + 0.5) * grid.hx(), (cj + 0.5) * grid.hy()};
      const EffectiveParams ep = table.interpolate(s_field(t_new, xc));
      acell[static_cast<std::size_t>(grid.cell_index(ci, cj))] = ep.D * (1.0 / ep.phi);
    }

  const std::vector<double> M = lumped_areas(grid);
  const LinearSystem sys = implicit_system(grid, acell, M, dt, bc);

  std::vector<Vec2> gphi(static_cast<std::size_t>(N));
  par_for(static_cast<std::ptrdiff_t>(N), [&](std::ptrdiff_t k) {
    gphi[static_cast<std::size_t>(k)] =
        node_gradient(grid, phi_new, static_cast<int>(k) % mx, static_cast<int>(k) / mx);
  });

  std::vector<double> ctil = state.c;
  std::vector<double> x = state.c;
  for (int k = 0; k < N; ++k)
    if (sys.mask[static_cast<std::size_t>(k)]) x[static_cast<std::size_t>(k)] = sys.value[static_cast<std::size_t>(k)];
  std::vector<double> b(static_cast<std::size_t>(N));

  q1::CgResult cg{};
  int pic = 0;
  bool converged = false;
  while (pic < opt.picard_max) {
    ++pic;
    par_for(static_cast<std::ptrdiff_t>(N), [&](std::ptrdiff_t kk) {
      const std::size_t k = static_cast<std::size_t>(kk);
      if (sys.mask[k]) {
        b[k] = sys.value[k];
        return;
      }
      const int i = static_cast<int>(kk) % mx, j = static_cast<int>(kk) / mx;
      const Vec2 gc = node_gradient(grid, ctil, i, j);
      double r = -dtphi[k] / phi_new[k] * ctil[k] + sig[k] / phi_new[k] * rate.f(ctil[k]) +
                 dot(Dn[k] * gphi[k], gc) / (phi_new[k] * phi_new[k]);
      if (advective_div) r -= (*advective_div)[k] / phi_new[k];
      b[k] = M[k] * (state.c[k] + dt * r) + sys.shift[k];
    });
    cg = q1::jacobi_cg(grid, sys.S, b, x, opt.cg_tol, 0, "transport-cg");
    const double diff = par_max(static_cast<std::ptrdiff_t>(N), [&](std::ptrdiff_t k) {
      return std::abs(x[static_cast<std::size_t>(k)] - ctil[static_cast<std::size_t>(k)]);
    });
    ctil = x;
    if (diff <= opt.picard_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw SolverError("picard", "no contraction after " + std::to_string(opt.picard_max) +
                                    " iterations at t = " + std::to_string(t_new) + ", reduce dt");
  check_finite(ctil, t_new);

  if (report) {
    report->picard_iters = pic;
    report->cg_iters = cg.iters;
    report->band_margin = -par_max(static_cast<std::ptrdiff_t>(N), [&](std::ptrdiff_t k) {
      const double p = phi_new[static_cast<std::size_t>(k)];
      return -std::min(p - delta, 1.0 - delta - p);
    });
  }

  TransportState out;
  out.c = std::move(ctil);
  out.phi = std::move(phi_new);
  out.t = t_new;
  return out;
}

}  // namespace

ReactionRate linear_rate() { return {[](double c) { return c; }, 1.0}; }
ReactionRate zero_rate() { return {[](double) { return 0.0; }, 0.0}; }

TransportState step_partial(const MacroGrid& grid, const TransportState& state, const SField& s_field,
                            const ParameterTable& table, const ReactionRate& rate, const TransportBC& bc,
                            double dt, const TransportOptions& opt, StepReport* report) {
  return partial_step_impl(grid, state, s_field, table, rate, bc, dt, opt, report, nullptr);
}

TransportState step_full(const MacroGrid& grid, const TransportState& state, const PhiTable& phi_table,
                         const TransportBC& bc, double dt, const TransportOptions& opt, StepReport* report) {
  validate_step(grid, state, dt);
  const int N = grid.nodes();
  const double t_new = state.t + dt;
  const double pmin = phi_table.phi_min(), pmax = phi_table.phi_max();

  for (int k = 0; k < N; ++k) {
    const double p = state.phi[static_cast<std::size_t>(k)];
    if (p < pmin || p > pmax)
      throw DegeneracyError("band-exit", "porosity " + std::to_string(p) + " at node " + std::to_string(k) +
                                             ", t = " + std::to_string(state.t) + " is outside [" +
                                             std::to_string(pmin) + ", " + std::to_string(pmax) + "]");
  }

  // Conservative implicit diffusion with the porosity-weighted lumped mass.
  std::vector<Mat2> Dcell(static_cast<std::size_t>(grid.cells()));
  for (int cj = 0; cj < grid.ny; ++cj)
    for (int ci = 0; ci < grid.nx; ++ci) {
      const double pc = 0.25 * (state.phi[static_cast<std::size_t>(grid.node_index(ci, cj))] +
                                state.phi[static_cast<std::size_t>(grid.node_index(ci + 1, cj))] +
                                state.phi[static_cast<std::size_t>(grid.node_index(ci + 1, cj + 1))] +
                                state.phi[static_cast<std::size_t>(grid.node_index(ci, cj + 1))]);
      Dcell[static_cast<std::size_t>(grid.cell_index(ci, cj))] = phi_table.interpolate_phi(pc).D;
    }
  const std::vector<double> M = lumped_areas(grid);
  std::vector<double> Mphi(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k)
    Mphi[static_cast<std::size_t>(k)] = M[static_cast<std::size_t>(k)] * state.phi[static_cast<std::size_t>(k)];

  const LinearSystem sys = implicit_system(grid, Dcell, Mphi, dt, bc);
  std::vector<double> b(static_cast<std::size_t>(N));
  std::vector<double> cstar = state.c;
  for (int k = 0; k < N; ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    if (sys.mask[kk]) {
      b[kk] = sys.value[kk];
      cstar[kk] = sys.value[kk];
    } else {
      b[kk] = Mphi[kk] * state.c[kk] + sys.shift[kk];
    }
  }
  const q1::CgResult cg = q1::jacobi_cg(grid, sys.S, b, cstar, opt.cg_tol, 0, "transport-cg");

  // Per-node implicit exchange. The same product dt sigma c enters both
  // updates, so fluid solute plus solid volume is conserved to rounding when
  // vn_sign = +1.
  const double w = opt.vn_sign >= 0 ? 1.0 : -1.0;
  std::vector<double> cn(static_cast<std::size_t>(N)), pn(static_cast<std::size_t>(N));
  std::vector<int> iters(static_cast<std::size_t>(N), 0);
  std::vector<int> flag(static_cast<std::size_t>(N), 0);  // 1 band exit, 2 no contraction
  std::vector<double> flag_phi(static_cast<std::size_t>(N), 0.0);

  par_for(static_cast<std::ptrdiff_t>(N), [&](std::ptrdiff_t kk) {
    const std::size_t k = static_cast<std::size_t>(kk);
    const double po = state.phi[k];
    const double cs = cstar[k];

    const auto fail_band = [&](double p) {
      flag[k] = 1;
      flag_phi[k] = p;
    };

    if (sys.mask[k]) {
      // Pinned concentration; only the porosity relaxes.
      const double cv = sys.value[k];
      double p = po;
      bool conv = false;
      int it = 0;
      while (it < opt.picard_max) {
        ++it;
        if (p < pmin || p > pmax) return fail_band(p);
        const double pnext = po - w * dt * phi_table.sigma_at_phi(p) * cv;
        const double jump = std::abs(pnext - p);
        p = pnext;
        if (jump <= opt.picard_tol) {
          conv = true;
          break;
        }
      }
      if (!conv) {
        flag[k] = 2;
        return;
      }
      if (p < pmin || p > pmax) return fail_band(p);
      cn[k] = cv;
      pn[k] = p;
      iters[k] = it;
      return;
    }

    double p = po, c = cs;
    bool conv = false;
    int it = 0;
    const auto solve_pair = [&](double r, double& c_out, double& p_out) {
      const double a = dt * r;
      const double bq = po + a;
      const double q = po * cs;
      const double disc = bq * bq - 4.0 * w * a * q;
      if (disc < 0.0) return false;  // implicit step has no real root: blowup
      c_out = 2.0 * q / (bq + std::sqrt(disc));
      p_out = po - w * a * c_out;
      return true;
    };
    while (it < opt.picard_max) {
      ++it;
      if (p < pmin || p > pmax) return fail_band(p);
      double cnext, pnext;
      if (!solve_pair(phi_table.sigma_at_phi(p), cnext, pnext)) {
        flag[k] = 2;
        return;
      }
      const double jump = std::max(std::abs(cnext - c), std::abs(pnext - p));
      c = cnext;
      p = pnext;
      if (jump <= opt.picard_tol) {
        conv = true;
        break;
      }
    }
    if (!conv) {
      flag[k] = 2;
      return;
    }
    // Refresh the rate at the converged porosity, then apply both updates
    // with the identical exchange term.
    if (p < pmin || p > pmax) return fail_band(p);
    const double r = phi_table.sigma_at_phi(p);
    double cq, pq;
    if (!solve_pair(r, cq, pq)) {
      flag[k] = 2;
      return;
    }
    const double exch = dt * r * cq;
    const double pfin = po - w * exch;
    if (pfin < pmin || pfin > pmax) return fail_band(pfin);
    pn[k] = pfin;
    cn[k] = (po * cs - exch) / pfin;
    iters[k] = it;
  });

  for (int k = 0; k < N; ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    if (flag[kk] == 1)
      throw DegeneracyError("band-exit", "porosity " + std::to_string(flag_phi[kk]) + " at node " +
                                             std::to_string(k) + ", t = " + std::to_string(t_new) +
                                             " leaves [" + std::to_string(pmin) + ", " +
                                             std::to_string(pmax) + "]");
    if (flag[kk] == 2)
      throw SolverError("picard", "exchange did not contract at node " + std::to_string(k) +
                                      ", t = " + std::to_string(t_new) + ", reduce dt");
  }
  check_finite(cn, t_new);

  if (report) {
    report->picard_iters = *std::max_element(iters.begin(), iters.end());
    report->cg_iters = cg.iters;
    report->band_margin = -par_max(static_cast<std::ptrdiff_t>(N), [&](std::ptrdiff_t k) {
      const double p = pn[static_cast<std::size_t>(k)];
      return -std::min(p - pmin, pmax - p);
    });
  }

  TransportState out;
  out.c = std::move(cn);
  out.phi = std::move(pn);
  out.t = t_new;
  return out;
}

TransportState step_advective(const MacroGrid& grid, const TransportState& state, const SField& s_field,
                              const ParameterTable& table, const DarcyField& darcy, const ReactionRate& rate,
                              const TransportBC& bc, double dt, const TransportOptions& opt,
                              StepReport* report) {
  validate_step(grid, state, dt);
  if (static_cast<int>(darcy.v.size()) != grid.cells())
    throw ConfigError("darcy-field", "velocity field does not match the grid");

  double speed = 0.0;
  for (const Vec2& v : darcy.v)
    speed = std::max(speed, std::max(std::abs(v.x) / grid.hx(), std::abs(v.y) / grid.hy()));
  const double cfl = speed * dt;
  if (cfl > opt.cfl_max)
    throw SolverError("cfl", "advective CFL number " + std::to_string(cfl) + " exceeds " +
                                 std::to_string(opt.cfl_max) + ", reduce dt");

  std::vector<double> budget = upwind_budgets(grid, state.c, darcy, bc, nullptr);
  const std::vector<double> M = lumped_areas(grid);
  for (std::size_t k = 0; k < budget.size(); ++k) budget[k] /= M[k];
  return partial_step_impl(grid, state, s_field, table, rate, bc, dt, opt, report, &budget);
}

std::vector<double> upwind_divergence(const MacroGrid& grid, const std::vector<double>& c,
                                      const DarcyField& darcy, const TransportBC& bc) {
  std::vector<double> div = upwind_budgets(grid, c, darcy, bc, nullptr);
  const std::vector<double> M = lumped_areas(grid);
  for (std::size_t k = 0; k < div.size(); ++k) div[k] /= M[k];
  return div;
}

AdvectionAudit advection_audit(const MacroGrid& grid, const std::vector<double>& c, const DarcyField& darcy,
                               const TransportBC& bc) {
  AdvectionAudit audit;
  std::vector<double> budget = upwind_budgets(grid, c, darcy, bc, &audit.boundary_flux);
  const std::vector<double> M = lumped_areas(grid);
  double acc = 0.0;
  for (std::size_t k = 0; k < budget.size(); ++k) acc += M[k] * (budget[k] / M[k]);
  audit.interior_sum = acc;
  audit.defect = std::abs(audit.interior_sum - audit.boundary_flux);
  return audit;
}

MassReport mass_report(const MacroGrid& grid, const TransportState& state) {
  validate_step(grid, state, 1.0);
  const std::vector<double> M = lumped_areas(grid);
  MassReport rep;
  rep.fluid = par_sum(static_cast<std::ptrdiff_t>(grid.nodes()), [&](std::ptrdiff_t k) {
    return M[static_cast<std::size_t>(k)] * state.phi[static_cast<std::size_t>(k)] *
           state.c[static_cast<std::size_t>(k)];
  });
  rep.solid = par_sum(static_cast<std::ptrdiff_t>(grid.nodes()), [&](std::ptrdiff_t k) {
    return M[static_cast<std::size_t>(k)] * (1.0 - state.phi[static_cast<std::size_t>(k)]);
  });
  rep.total = rep.fluid + rep.solid;
  return rep;
}

RunResult run_transport(const MacroGrid& grid, const TransportState& initial, const RunSetup& setup) {
  if (setup.T < 0.0) throw ConfigError("run-setup", "final time must be nonnegative");
  if (setup.T > 0.0 && !(setup.dt > 0.0)) throw ConfigError("run-setup", "dt must be positive");
  const bool partial = setup.mode != CouplingMode::full_diffusive;
  if (partial) {
    if (!setup.table) throw ConfigError("run-setup", "partial modes need a parameter table");
    if (!setup.s_field) throw ConfigError("run-setup", "partial modes need the order parameter field");
    if (!setup.rate.f) throw ConfigError("run-setup", "partial modes need a reaction rate");
  } else if (!setup.phi_table) {
    throw ConfigError("run-setup", "full coupling needs the porosity-indexed table");
  }
  if (setup.mode == CouplingMode::partial_advective && !setup.table->has_K())
    throw ConfigError("run-setup", "advective mode needs permeability columns in the table");

  MacroGrid darcy_grid = grid;
  darcy_grid.boundary = setup.darcy_boundary;

  RunResult res;
  TransportState cur = initial;

  const auto record = [&](const StepReport& rep) {
    const MassReport m = mass_report(grid, cur);
    StepDiagnostics d;
    d.t = cur.t;
    d.mass_fluid = m.fluid;
    d.mass_solid = m.solid;
    d.mass_total = m.total;
    d.phi_min = *std::min_element(cur.phi.begin(), cur.phi.end());
    d.phi_max = *std::max_element(cur.phi.begin(), cur.phi.end());
    d.picard_iters = rep.picard_iters;
    d.band_margin = rep.band_margin;
    res.trajectory.push_back(cur);
    res.diagnostics.push_back(d);
  };
  record(StepReport{});

  const auto advance = [&](double dt) {
    StepReport rep;
    switch (setup.mode) {
      case CouplingMode::partial_diffusive:
        cur = step_partial(grid, cur, setup.s_field, *setup.table, setup.rate, setup.bc, dt, setup.opt, &rep);
        break;
      case CouplingMode::full_diffusive:
        cur = step_full(grid, cur, *setup.phi_table, setup.bc, dt, setup.opt, &rep);
        break;
      case CouplingMode::partial_advective: {
        std::vector<Mat2> K(static_cast<std::size_t>(grid.cells()));
        for (int cj = 0; cj < grid.ny; ++cj)
          for (int ci = 0; ci < grid.nx; ++ci) {
            const Vec2 xc{(ci + 0.5) * grid.hx(), (cj + 0.5) * grid.hy()};
            K[static_cast<std::size_t>(grid.cell_index(ci, cj))] =
                setup.table->interpolate(setup.s_field(cur.t, xc)).K;
          }
        const DarcyField flow = solve_darcy(darcy_grid, K, setup.darcy_data);
        cur = step_advective(grid, cur, setup.s_field, *setup.table, flow, setup.rate, setup.bc, dt,
                             setup.opt, &rep);
        break;
      }
    }
    record(rep);
  };

  try {
    while (cur.t + setup.dt <= setup.T + 1e-12) advance(setup.dt);
    if (setup.T - cur.t > 1e-12) advance(setup.T - cur.t);
  } catch (const DegeneracyError& e) {
    res.hit_horizon = true;
    res.horizon_t = cur.t;
    res.horizon_reason = e.what();
  }
  return res;
}

}  // namespace poroscale
