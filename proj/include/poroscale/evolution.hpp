#pragma once

#include <functional>
#include <vector>

#include "poroscale/geometry.hpp"
#include "poroscale/interface_curve.hpp"
#include "poroscale/vec2.hpp"

namespace poroscale {

// Normal interface speed. `base` is the smooth spatial speed (margin cutoff
// included); `band_factor` localizes it to a band around the initial
// interface. Trajectories freeze their band factor at launch, which realizes
// the constant-along-normals extension: a front vertex keeps full speed for
// the whole run while points launched outside the support never move.
struct SpeedField {
  std::function<double(Vec2)> base;
  std::function<Vec2(Vec2)> base_grad;
  std::function<double(Vec2)> band_factor;
  double vmod = 1.0;  // uniform modulation of the whole field

  // The full field; zero outside the support band and inside the margin.
  double vn(Vec2 y) const { return vmod * base(y) * band_factor(y); }
};

// Spatially uniform speed `amplitude`, cut to zero over 2h-wide quintic
// ramps outside the launch band (|phi0| in [6h, 8h]) and inside the cell
// margin. All launch nodes (|phi0| <= 6h) see factor exactly 1.
SpeedField uniform_speed(const LevelSetField& phi0, double amplitude);

// Geometry evolution samples. maps[k][t] is the position of launch node t at
// pseudo-time times[k]; fields[k] is the signed-distance reconstruction from
// the advected interface polyline curves[k].
struct EvolvedPath {
  UnitCellGrid grid;
  std::vector<double> times;
  std::vector<int> launch_nodes;            // node indices j*(n+1)+i
  std::vector<std::vector<Vec2>> maps;
  std::vector<LevelSetField> fields;
  std::vector<InterfacePolyline> curves;
  double z_drift = 0.0;          // max level-value drift over all trajectories
  double tubular_radius = 0.0;   // 1/max|kappa| of the initial interface
  double max_speed = 0.0;        // over launch set, after modulation

  int samples() const { return static_cast<int>(times.size()); }
};

// Integrates the characteristic system x' = v p/|p|, p' = -grad(v)|p| with
// classical RK4 from every launch node (|phi0| <= 6h, |grad phi0| >= 0.5)
// and every interface vertex. The carried level value z is checked through
// the conserved rate z' = v|p| + p4, p4 = -v(y0)|p(0)|, which vanishes
// analytically; its integral measures pure integrator error.
// Refuses runs whose total offset dt*steps*max|v| exceeds 80% of the
// tubular radius (validity-horizon). Trajectories entering the margin band
// raise path-validity; a non-positive discrete Jacobian determinant on the
// launch lattice raises a fold error; every reconstructed sample must pass
// the level-set validity checks.
EvolvedPath evolve(const LevelSetField& phi0, const SpeedField& speed, double dt, int steps);

// Porosity/surface-area consistency along a path built with uniform unit
// speed: centered differences of phi(s) against sigma(s).
struct PhiSigmaReport {
  double max_rel_dev = 0.0;  // max over interior samples of ||dphi/ds| - sigma| / sigma
  int sign = 0;              // observed sign of dphi/ds (+1: dissolution increases porosity)
  std::vector<double> phi, sigma, dphi_ds;
};
PhiSigmaReport phi_sigma_relation_check(const EvolvedPath& path);

// Geometry at physical time t for a path built with unit speed and a scalar
// speed history v(t): the field at pseudo-time V(t) = int_0^t v, by nodewise
// linear interpolation between samples. V outside the sampled range raises
// validity-horizon.
LevelSetField field_at_time(const EvolvedPath& path, const std::function<double(double)>& speed_history,
                            double t);

// Offset every interface vertex by s along the fluid-pointing unit normal
// -grad(phi0)/|grad(phi0)|; s < 0 recedes the solid boundary inward (matches
// evolve() with unit dissolution speed at pseudo-time -s). |s| at or beyond
// the tubular radius raises validity-horizon.
InterfacePolyline normal_offset_parameterization(const LevelSetField& phi0, double s);

}  // namespace poroscale
