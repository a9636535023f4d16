#include "poroscale/tables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "poroscale/errors.hpp"
#include "poroscale/interface_curve.hpp"

namespace poroscale {

namespace {

std::vector<double> column(const std::vector<Mat2>& m, int which) {
  std::vector<double> out(m.size());
  for (std::size_t k = 0; k < m.size(); ++k)
    out[k] = which == 0 ? m[k].a11 : (which == 1 ? m[k].a12 : m[k].a22);
  return out;
}

void check_tensor(const EffectiveTensor& t, const char* name, int sample) {
  if (t.asym > 1e-6 * (std::abs(t.m.a11) + std::abs(t.m.a22)))
    throw SolverError("tensor-invariant",
                      std::string(name) + " asymmetry at sample " + std::to_string(sample));
  if (t.lambda_min() < -1e-10)
    throw SolverError("tensor-invariant",
                      std::string(name) + " indefinite at sample " + std::to_string(sample));
}

ParameterTable build_from_fields(const std::vector<double>& s,
                                 const std::function<LevelSetField(int)>& field_at,
                                 const TableOptions& opt) {
  const int count = static_cast<int>(s.size());
  if (count < 2) throw ConfigError("table-samples", "need at least 2 samples");
  for (int k = 0; k + 1 < count; ++k)
    if (!(s[static_cast<std::size_t>(k)] < s[static_cast<std::size_t>(k + 1)]))
      throw ConfigError("table-samples", "pseudo-time samples must be strictly increasing");
  if (!(opt.delta > 0.0)) throw ConfigError("table-delta", "non-degeneracy delta must be positive");

  std::vector<double> phi(static_cast<std::size_t>(count)), sigma(static_cast<std::size_t>(count));
  std::vector<Mat2> D(static_cast<std::size_t>(count)), K;
  if (opt.with_K) K.resize(static_cast<std::size_t>(count));

  for (int k = 0; k < count; ++k) {
    const LevelSetField field = field_at(k);
    validate_levelset(field, "table sample geometry");
    const std::size_t uk = static_cast<std::size_t>(k);
    phi[uk] = porosity(field);
    sigma[uk] = surface_area(field);

    const DiffusionCellSolution dsol = solve_diffusion_cell(field, opt.diffusion);
    check_tensor(dsol.D, "D", k);
    D[uk] = dsol.D.m;

    if (opt.with_K) {
      const StokesCellSolution ksol = solve_stokes_cell(field, opt.stokes);
      check_tensor(ksol.K, "K", k);
      K[uk] = ksol.K.m;
    }

    double lo, hi;
    sym_eigenvalues(D[uk], lo, hi);
    if (phi[uk] < opt.delta || phi[uk] > 1.0 - opt.delta || sigma[uk] < opt.delta || lo < opt.delta)
      throw DegeneracyError("degenerate-sample",
                            "sample " + std::to_string(k) + " at s = " + std::to_string(s[uk]) +
                                " leaves the non-degeneracy band (phi = " + std::to_string(phi[uk]) +
                                ", sigma = " + std::to_string(sigma[uk]) + ", lambda_min(D) = " +
                                std::to_string(lo) + ", delta = " + std::to_string(opt.delta) + ")");
  }

  return ParameterTable(s, std::move(phi), std::move(sigma), std::move(D), std::move(K), opt.delta);
}

}  // namespace

ParameterTable::ParameterTable(std::vector<double> s, std::vector<double> phi, std::vector<double> sigma,
                               std::vector<Mat2> D, std::vector<Mat2> K, double delta)
    : s_(std::move(s)),
      phi_(std::move(phi)),
      sigma_(std::move(sigma)),
      D_(std::move(D)),
      K_(std::move(K)),
      delta_(delta),
      phi_interp_(s_, phi_),
      sigma_interp_(s_, sigma_),
      D_interp_{MonotoneCubic(s_, column(D_, 0)), MonotoneCubic(s_, column(D_, 1)),
                MonotoneCubic(s_, column(D_, 2))} {
  if (!K_.empty())
    K_interp_ = {MonotoneCubic(s_, column(K_, 0)), MonotoneCubic(s_, column(K_, 1)),
                 MonotoneCubic(s_, column(K_, 2))};
}

EffectiveParams ParameterTable::sample(int k) const {
  const std::size_t uk = static_cast<std::size_t>(k);
  EffectiveParams p;
  p.s = s_[uk];
  p.phi = phi_[uk];
  p.sigma = sigma_[uk];
  p.D = D_[uk];
  p.has_K = has_K();
  if (p.has_K) p.K = K_[uk];
  return p;
}

EffectiveParams ParameterTable::interpolate(double s) const {
  EffectiveParams p;
  p.s = s;
  p.phi = phi_interp_.eval(s);
  p.sigma = sigma_interp_.eval(s);
  const double d11 = D_interp_[0].eval(s), d12 = D_interp_[1].eval(s), d22 = D_interp_[2].eval(s);
  p.D = {d11, d12, d12, d22};
  p.has_K = has_K();
  if (p.has_K) {
    const double k11 = K_interp_[0].eval(s), k12 = K_interp_[1].eval(s), k22 = K_interp_[2].eval(s);
    p.K = {k11, k12, k12, k22};
  }
  return p;
}

ParameterTable build_table(const DiffeoPath& path, const TableOptions& opt) {
  const int count = std::max(2, opt.samples);
  std::vector<double> s(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    s[static_cast<std::size_t>(k)] = path.s_min + (path.s_max - path.s_min) * k / (count - 1);
  const UnitCellGrid grid(opt.n);
  return build_from_fields(
      s, [&](int k) { return path.field_at(s[static_cast<std::size_t>(k)], grid); }, opt);
}

ParameterTable build_table(const EvolvedPath& path, const TableOptions& opt) {
  const int avail = path.samples();
  if (avail < 2) throw ConfigError("table-samples", "path holds fewer than 2 samples");
  const int count = std::min(std::max(2, opt.samples), avail);

  std::vector<int> idx(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    idx[static_cast<std::size_t>(k)] =
        static_cast<int>(std::lround(static_cast<double>(k) * (avail - 1) / (count - 1)));

  std::vector<double> s(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    s[static_cast<std::size_t>(k)] = path.times[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
  return build_from_fields(
      s, [&](int k) { return path.fields[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]; },
      opt);
}

PhiTable::PhiTable(const ParameterTable& parent) : parent_phi_(parent.s(), parent.phi()) {
  const int count = parent.size();
  const auto& phi = parent.phi();
  bool increasing = true, decreasing = true;
  for (int k = 0; k + 1 < count; ++k) {
    if (!(phi[static_cast<std::size_t>(k)] < phi[static_cast<std::size_t>(k + 1)])) increasing = false;
    if (!(phi[static_cast<std::size_t>(k)] > phi[static_cast<std::size_t>(k + 1)])) decreasing = false;
  }
  if (!increasing && !decreasing)
    throw DegeneracyError("non-monotone-porosity", "reparametrization needs strictly monotone porosity");
  reversed_ = decreasing;
  has_K_ = parent.has_K();

  const auto pick = [&](const std::vector<double>& col) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
      out[static_cast<std::size_t>(k)] = col[static_cast<std::size_t>(reversed_ ? count - 1 - k : k)];
    return out;
  };
  const auto pick_m = [&](const std::vector<Mat2>& col, int which) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const Mat2& m = col[static_cast<std::size_t>(reversed_ ? count - 1 - k : k)];
      out[static_cast<std::size_t>(k)] = which == 0 ? m.a11 : (which == 1 ? m.a12 : m.a22);
    }
    return out;
  };

  phi_ = pick(parent.phi());
  s_interp_ = MonotoneCubic(phi_, pick(parent.s()));
  sigma_interp_ = MonotoneCubic(phi_, pick(parent.sigma()));
  D_interp_ = {MonotoneCubic(phi_, pick_m(parent.D(), 0)), MonotoneCubic(phi_, pick_m(parent.D(), 1)),
               MonotoneCubic(phi_, pick_m(parent.D(), 2))};
  if (has_K_)
    K_interp_ = {MonotoneCubic(phi_, pick_m(parent.K(), 0)), MonotoneCubic(phi_, pick_m(parent.K(), 1)),
                 MonotoneCubic(phi_, pick_m(parent.K(), 2))};
}

double PhiTable::s_from_phi(double phi) const {
  if (phi < phi_.front() || phi > phi_.back())
    throw HorizonError("extrapolation", "porosity outside the sampled range");
  double lo = parent_phi_.x_min(), hi = parent_phi_.x_max();
  // phi(s) is monotone; bisect on its sign relative to the target.
  const bool incr = !reversed_;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double val = parent_phi_.eval(mid);
    if ((val < phi) == incr)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

EffectiveParams PhiTable::interpolate_phi(double phi) const {
  EffectiveParams p;
  p.s = s_from_phi(phi);
  p.phi = phi;
  p.sigma = sigma_interp_.eval(phi);
  const double d11 = D_interp_[0].eval(phi), d12 = D_interp_[1].eval(phi), d22 = D_interp_[2].eval(phi);
  p.D = {d11, d12, d12, d22};
  p.has_K = has_K_;
  if (has_K_) {
    const double k11 = K_interp_[0].eval(phi), k12 = K_interp_[1].eval(phi), k22 = K_interp_[2].eval(phi);
    p.K = {k11, k12, k12, k22};
  }
  return p;
}

PhiTable reparametrize_by_phi(const ParameterTable& table) { return PhiTable(table); }

const SmoothnessColumn* SmoothnessReport::find(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

SmoothnessReport smoothness_check(const ParameterTable& table) {
  const int count = table.size();
  if (count < 6) throw ConfigError("smoothness-samples", "need at least 6 samples");

  const int m0 = (count - 1) / 2;
  const int kmax = std::min(m0, count - 1 - m0);
  // Dyadic knot-aligned half-widths so every difference uses solver values.
  std::vector<int> widths;
  int k0 = kmax - kmax % 4;
  if (k0 >= 4) {
    widths = {k0, k0 / 2, k0 / 4};
  } else {
    widths = {kmax, kmax / 2};
    if (widths.back() < 1) widths.back() = 1;
    if (widths[0] == widths[1]) widths.pop_back();
  }

  SmoothnessReport rep;
  rep.s0 = table.s()[static_cast<std::size_t>(m0)];

  const auto add_column = [&](const std::string& name, const std::vector<double>& y) {
    SmoothnessColumn col;
    col.name = name;
    for (int w : widths) {
      const std::size_t a = static_cast<std::size_t>(m0 - w), b = static_cast<std::size_t>(m0 + w);
      const double span = table.s()[b] - table.s()[a];
      col.step.push_back(0.5 * span);
      col.fd.push_back((y[b] - y[a]) / span);
    }
    const std::size_t ns = col.fd.size();
    col.noise_floor =
        (std::abs(y[static_cast<std::size_t>(m0)]) * 1e-9 + 1e-12) / col.step.back();
    if (ns >= 2) {
      col.increment = std::abs(col.fd[ns - 1] - col.fd[ns - 2]);
      col.richardson = col.fd[ns - 1] + (col.fd[ns - 1] - col.fd[ns - 2]) / 3.0;
    }
    if (ns >= 3) {
      const double num = std::abs(col.fd[0] - col.fd[1]);
      const double den = std::abs(col.fd[1] - col.fd[2]);
      if (den > col.noise_floor && num > 0.0)
        col.order = std::log2(num / den);
    }
    rep.columns.push_back(std::move(col));
  };

  add_column("phi", table.phi());
  add_column("sigma", table.sigma());
  add_column("D11", column(table.D(), 0));
  add_column("D12", column(table.D(), 1));
  add_column("D22", column(table.D(), 2));
  if (table.has_K()) {
    add_column("K11", column(table.K(), 0));
    add_column("K12", column(table.K(), 1));
    add_column("K22", column(table.K(), 2));
  }
  return rep;
}

}  // namespace poroscale
