#pragma once

// Macroscopic reaction-diffusion(-advection) time stepping on the rectangle
// grid. Partial coupling evaluates the effective coefficients through a
// prescribed order parameter s(t, x); full coupling evolves the porosity
// itself through the porosity-indexed table. Q1 elements with lumped mass,
// implicit Euler diffusion, Picard on the nonlinear right-hand side.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "poroscale/darcy.hpp"
#include "poroscale/tables.hpp"

namespace poroscale {

struct TransportState {
  std::vector<double> c;    // concentration per node
  std::vector<double> phi;  // porosity per node
  double t = 0.0;
};

struct ReactionRate {
  std::function<double(double)> f;
  double lipschitz_bound = 0.0;  // optional local bound, 0 when unknown
};

ReactionRate linear_rate();  // f(c) = c, the full-coupling contract
ReactionRate zero_rate();

// Order parameter for the partial modes.
using SField = std::function<double(double, Vec2)>;

// Concentration boundary values on Dirichlet edges (constant in time); flux
// edges carry no diffusive flux. Edge kinds come from MacroGrid::boundary
// with the same corner rule as the pressure solver.
struct TransportBC {
  std::array<double, 4> c_dir{0.0, 0.0, 0.0, 0.0};
};

struct TransportOptions {
  double picard_tol = 1e-8;  // sup-norm increment stopping both Picard loops
  int picard_max = 50;
  double cg_tol = 1e-13;
  int vn_sign = 1;           // +1: solute deposits, porosity shrinks where c > 0
  double cfl_max = 0.9;
};

struct StepReport {
  int picard_iters = 0;
  int cg_iters = 0;          // last linear solve of the step
  double band_margin = 0.0;  // min distance of phi to the admissible band edge
};

// One implicit Euler step of
//   dc/dt - div((D/phi) grad c) = -(d phi/dt / phi) c~ + (sigma/phi) f(c~)
//                                 + (D/phi^2) grad phi . grad c~
// with coefficients frozen at s(t+dt, x) and the right-hand side iterated at
// the Picard iterate c~. d phi/dt is the backward difference of phi(s(., x)).
TransportState step_partial(const MacroGrid& grid, const TransportState& state, const SField& s_field,
                            const ParameterTable& table, const ReactionRate& rate, const TransportBC& bc,
                            double dt, const TransportOptions& opt = {}, StepReport* report = nullptr);

// Operator-split step of the porosity-coupled pair
//   phi dc/dt - div(D(phi) grad c) = sigma(phi) c^2 - sigma(phi) c
//   d phi/dt = -sigma(phi) c
// (1) conservative implicit diffusion with the porosity-weighted lumped mass,
// (2) per-node implicit exchange written so that phi c + (1 - phi) is
// conserved to rounding when vn_sign = +1.
TransportState step_full(const MacroGrid& grid, const TransportState& state, const PhiTable& phi_table,
                         const TransportBC& bc, double dt, const TransportOptions& opt = {},
                         StepReport* report = nullptr);

// Partial-coupling step with advection: identical discretization to
// step_partial plus an explicit first-order upwind term -div(v c^n)/phi on
// the right-hand side. Enforces |v| dt / h <= cfl_max.
TransportState step_advective(const MacroGrid& grid, const TransportState& state, const SField& s_field,
                              const ParameterTable& table, const DarcyField& darcy, const ReactionRate& rate,
                              const TransportBC& bc, double dt, const TransportOptions& opt = {},
                              StepReport* report = nullptr);

// Upwind divergence of (v c) per node over dual cells centered at the nodes.
// Each dual face is split into the half segments lying in the adjacent Darcy
// cells, and every half carries its own cell-center velocity; inflow through
// a Dirichlet edge carries the boundary concentration, any other boundary
// transport carries the node value.
std::vector<double> upwind_divergence(const MacroGrid& grid, const std::vector<double>& c,
                                      const DarcyField& darcy, const TransportBC& bc);

// Telescoping audit of the upwind operator: the dual-cell budgets must sum to
// the net boundary advective outflow exactly (interior fluxes cancel).
struct AdvectionAudit {
  double interior_sum = 0.0;
  double boundary_flux = 0.0;
  double defect = 0.0;
};
AdvectionAudit advection_audit(const MacroGrid& grid, const std::vector<double>& c, const DarcyField& darcy,
                               const TransportBC& bc);

// Lumped integrals for the mass bookkeeping.
struct MassReport {
  double fluid = 0.0;  // integral of phi c
  double solid = 0.0;  // integral of (1 - phi)
  double total = 0.0;
};
MassReport mass_report(const MacroGrid& grid, const TransportState& state);

enum class CouplingMode { partial_diffusive, full_diffusive, partial_advective };

struct StepDiagnostics {
  double t = 0.0;
  double mass_fluid = 0.0, mass_solid = 0.0, mass_total = 0.0;
  double phi_min = 0.0, phi_max = 0.0;
  int picard_iters = 0;
  double band_margin = 0.0;
};

struct RunSetup {
  CouplingMode mode = CouplingMode::partial_diffusive;
  SField s_field;                         // partial modes
  const ParameterTable* table = nullptr;  // partial modes
  const PhiTable* phi_table = nullptr;    // full mode
  ReactionRate rate;                      // partial modes
  TransportBC bc;
  std::array<EdgeKind, 4> darcy_boundary{EdgeKind::flux, EdgeKind::dirichlet, EdgeKind::flux,
                                         EdgeKind::flux};  // advective mode
  DarcyData darcy_data;                                    // advective mode
  double T = 0.0;
  double dt = 0.0;
  TransportOptions opt;
};

// Time loop dispatching on the coupling mode; advective runs re-solve Darcy
// on every slice from K(s(t, .)). A degeneracy during stepping ends the run
// gracefully: the trajectory keeps every valid state and the report carries
// the reached horizon instead of propagating the error.
struct RunResult {
  std::vector<TransportState> trajectory;  // trajectory[0] is the initial state
  std::vector<StepDiagnostics> diagnostics;
  bool hit_horizon = false;
  double horizon_t = 0.0;
  std::string horizon_reason;
};
RunResult run_transport(const MacroGrid& grid, const TransportState& initial, const RunSetup& setup);

}  // namespace poroscale
