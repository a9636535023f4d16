#pragma once

#include <array>
#include <string>
#include <vector>

#include "poroscale/cell_diffusion.hpp"
#include "poroscale/cell_stokes.hpp"
#include "poroscale/diffeo.hpp"
#include "poroscale/evolution.hpp"
#include "poroscale/monotone_cubic.hpp"
#include "poroscale/tensor.hpp"

namespace poroscale {

// Upscaled coefficients at one geometry state.
struct EffectiveParams {
  double s = 0.0;
  double phi = 0.0;
  double sigma = 0.0;
  Mat2 D;
  Mat2 K;
  bool has_K = false;
};

struct TableOptions {
  int n = 64;          // unit-cell resolution of the per-sample solves
  int samples = 8;
  bool with_K = false;
  double delta = 0.05;  // non-degeneracy band: delta <= phi <= 1 - delta,
                        // sigma >= delta, lambda_min(D) >= delta
  DiffusionOptions diffusion;
  StokesOptions stokes;
};

// Effective parameters sampled along a geometry path, with shape-preserving
// cubic interpolants per scalar column. Immutable after build.
class ParameterTable {
 public:
  ParameterTable(std::vector<double> s, std::vector<double> phi, std::vector<double> sigma,
                 std::vector<Mat2> D, std::vector<Mat2> K, double delta);

  int size() const { return static_cast<int>(s_.size()); }
  bool has_K() const { return !K_.empty(); }
  double delta() const { return delta_; }
  double s_min() const { return s_.front(); }
  double s_max() const { return s_.back(); }

  const std::vector<double>& s() const { return s_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& sigma() const { return sigma_; }
  const std::vector<Mat2>& D() const { return D_; }
  const std::vector<Mat2>& K() const { return K_; }

  EffectiveParams sample(int k) const;

  // Monotone-cubic per entry; matrices stay symmetric by construction.
  // Out-of-range s raises the extrapolation error.
  EffectiveParams interpolate(double s) const;

  double phi_at(double s) const { return phi_interp_.eval(s); }
  double sigma_at(double s) const { return sigma_interp_.eval(s); }

 private:
  std::vector<double> s_, phi_, sigma_;
  std::vector<Mat2> D_, K_;
  double delta_ = 0.0;
  MonotoneCubic phi_interp_, sigma_interp_;
  std::array<MonotoneCubic, 3> D_interp_;  // D11, D12, D22
  std::array<MonotoneCubic, 3> K_interp_;
};

// Per-sample cell solves along the path geometries. Samples violating the
// non-degeneracy band raise a degenerate-sample error naming the sample.
ParameterTable build_table(const DiffeoPath& path, const TableOptions& opt = {});
// Uses the path's own pseudo-time samples, thinned evenly to opt.samples.
ParameterTable build_table(const EvolvedPath& path, const TableOptions& opt = {});

// The same table re-indexed by porosity. The inverse s(phi) is evaluated by
// bisection on the parent phi(s) interpolant.
class PhiTable {
 public:
  PhiTable(const ParameterTable& parent);

  double phi_min() const { return phi_.front(); }
  double phi_max() const { return phi_.back(); }
  const std::vector<double>& phi() const { return phi_; }

  double s_from_phi(double phi) const;
  double sigma_at_phi(double phi) const { return sigma_interp_.eval(phi); }
  EffectiveParams interpolate_phi(double phi) const;

 private:
  std::vector<double> phi_;
  bool reversed_ = false;          // parent phi was decreasing
  bool has_K_ = false;
  MonotoneCubic s_interp_, sigma_interp_;
  std::array<MonotoneCubic, 3> D_interp_, K_interp_;
  MonotoneCubic parent_phi_;       // phi(s), for the bisection inverse
};

// Raises a reparametrization error unless phi is strictly monotone in s.
PhiTable reparametrize_by_phi(const ParameterTable& table);

// Central finite differences of every column at dyadic knot-aligned step
// sizes around the middle sample, so each difference uses pure solver values.
struct SmoothnessColumn {
  std::string name;
  std::vector<double> step;  // decreasing
  std::vector<double> fd;    // central difference per step
  double richardson = 0.0;   // from the two smallest steps (order-2 model)
  double order = 0.0;        // 0 when fewer than 3 steps or increments at noise
  double increment = 0.0;    // |fd at the two smallest steps|
  double noise_floor = 0.0;
};

struct SmoothnessReport {
  double s0 = 0.0;
  std::vector<SmoothnessColumn> columns;
  const SmoothnessColumn* find(const std::string& name) const;
};

// Requires >= 6 samples; order estimates need >= 9 (three dyadic steps).
SmoothnessReport smoothness_check(const ParameterTable& table);

}  // namespace poroscale
