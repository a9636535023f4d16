#pragma once

#include <array>
#include <vector>

#include "poroscale/vec2.hpp"

namespace poroscale {

enum class EdgeKind { dirichlet, flux };

// Edge order everywhere: 0 left (x = 0), 1 right (x = Lx), 2 bottom (y = 0),
// 3 top (y = Ly).
struct MacroGrid {
  int nx = 0, ny = 0;
  double Lx = 1.0, Ly = 1.0;
  std::array<EdgeKind, 4> boundary{EdgeKind::flux, EdgeKind::dirichlet, EdgeKind::flux,
                                   EdgeKind::flux};

  MacroGrid() = default;
  MacroGrid(int nx_, int ny_, double Lx_ = 1.0, double Ly_ = 1.0);

  double hx() const { return Lx / nx; }
  double hy() const { return Ly / ny; }
  int nodes_x() const { return nx + 1; }
  int nodes_y() const { return ny + 1; }
  int nodes() const { return nodes_x() * nodes_y(); }
  int cells() const { return nx * ny; }
  int node_index(int i, int j) const { return j * nodes_x() + i; }
  int cell_index(int i, int j) const { return j * nx + i; }

  bool has_dirichlet() const;
};

// Edge data are piecewise constant per edge: g_flux is the inward normal
// flux -v.n on flux edges, p_dir the pressure on Dirichlet edges. Corner
// nodes shared by two Dirichlet edges take the later edge's value in the
// fixed order left, right, bottom, top.
struct DarcyData {
  std::vector<double> f;  // source per cell; empty means 0
  std::array<double, 4> g_flux{0.0, 0.0, 0.0, 0.0};
  std::array<double, 4> p_dir{0.0, 0.0, 0.0, 0.0};
};

struct DarcyField {
  MacroGrid grid;
  std::vector<double> p;      // per node
  std::vector<Vec2> v;        // per cell center, v = -K grad p
  std::vector<Mat2> Kfield;   // per cell, symmetric
  double lambda = 0.0;        // min eigenvalue of K over cells
  double K_max = 0.0;         // max eigenvalue
  int iters = 0;
  double rel_residual = 0.0;
  double mass_balance = 0.0;  // |outflow - integral of f|, via Dirichlet reactions
};

struct DarcyOptions {
  double tol = 1e-13;  // CG relative residual
  int max_iter = 0;    // 0: automatic cap from the grid size
};

// Q1 finite elements on the rectangle grid with cellwise-constant full
// symmetric K, 2x2 Gauss quadrature, Jacobi-preconditioned CG. Velocity is
// -K grad p evaluated at cell centers.
DarcyField solve_darcy(const MacroGrid& grid, const std::vector<Mat2>& Kfield, const DarcyData& data,
                       const DarcyOptions& opt = {});

// Continuous-dependence probe: solves with both tensors and reports the
// difference norms and the empirical estimate quotients.
struct ContinuityReport {
  double dk_linf = 0.0;   // max cellwise |K2 - K1|
  double dp_h1 = 0.0;
  double dv_l2 = 0.0;
  double dv_linf = 0.0;
  double ratio_l2 = 0.0;    // dv_l2 / dk_linf
  double ratio_linf = 0.0;  // dv_linf / sqrt(dk_linf)
};
ContinuityReport continuity_experiment(const MacroGrid& grid, const std::vector<Mat2>& K1,
                                       const std::vector<Mat2>& K2, const DarcyData& data,
                                       const DarcyOptions& opt = {});

// Independent per-slice solves; v_diff_l2[k] = ||v(t_{k+1}) - v(t_k)||_L2.
struct DarcySlices {
  std::vector<DarcyField> slices;
  std::vector<double> v_diff_l2;
};
DarcySlices darcy_time_slices(const MacroGrid& grid, const std::vector<std::vector<Mat2>>& Kts,
                              const DarcyData& data, const DarcyOptions& opt = {});

}  // namespace poroscale
