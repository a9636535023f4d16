#pragma once

// Text serialization of the simulator's artifacts. Every floating-point
// number is printed through format_double (printf %.17g), so rewriting the
// same data produces byte-identical files.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "poroscale/cell_diffusion.hpp"
#include "poroscale/cell_stokes.hpp"
#include "poroscale/darcy.hpp"
#include "poroscale/evolution.hpp"
#include "poroscale/geometry.hpp"
#include "poroscale/interface_curve.hpp"
#include "poroscale/tables.hpp"
#include "poroscale/transport.hpp"

namespace poroscale {

// Shortest 17-significant-digit form; round trips through strtod exactly.
std::string format_double(double v);

// Level-set grid file: header line `levelset n=<n> margin=<m>`, then n+1
// rows of n+1 whitespace-separated values, row-major with y2 increasing.
void write_levelset(const std::string& path, const LevelSetField& f);
LevelSetField read_levelset(const std::string& path);

// CSV `x,y,component_id`, one row per polyline vertex.
void write_polyline_csv(const std::string& path, const InterfacePolyline& curve);

// Effective-parameter record for one geometry:
// {phi, sigma, D, K?, residuals, params}.
void write_cell_summary(const std::string& path, const EffectiveParams& p,
                        const DiffusionCellSolution& diffusion, const StokesCellSolution* stokes);

// A directory holding one level-set file per sample (sample_###.lvl) plus
// path_index.txt listing the pseudo-times and the validity radius.
void write_path(const std::string& dir, const EvolvedPath& path);

// CSV `s,phi,sigma,D11,D12,D22,K11,K12,K22`, one row per sample, zeros in
// the K columns when the table was built without permeability.
void write_table_csv(const std::string& path, const ParameterTable& t);
// The same samples reordered by porosity with a leading `phi` column.
void write_phi_table_csv(const std::string& path, const ParameterTable& t);

// Legacy-VTK structured points, ASCII: pressure as point scalars and the
// cellwise velocity as cell vectors.
void write_darcy_vtk(const std::string& path, const DarcyField& f);
// Per-slice norm summary `slice,p_l2,v_l2,mass_balance,v_diff_l2` (the
// difference column pairs slice k with k+1 and is empty on the last row).
void write_darcy_norms_csv(const std::string& path, const DarcySlices& s);

// Concentration and porosity as point scalars of one time slice.
void write_state_vtk(const std::string& path, const MacroGrid& g, const TransportState& st);
// CSV `t,mass_fluid,mass_solid,mass_total,phi_min,phi_max,picard_iters`.
void write_diagnostics_csv(const std::string& path, const std::vector<StepDiagnostics>& d);

// 64-bit FNV-1a over the file bytes.
std::uint64_t fnv1a_file(const std::string& path);

// Artifact list in `<16-hex-digit-hash>  <name>` lines, sorted by name.
class Manifest {
 public:
  void add(const std::string& dir, const std::string& name);
  void write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;  // name, hash
};

}  // namespace poroscale
