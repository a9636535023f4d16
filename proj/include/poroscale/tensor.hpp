#pragma once

#include "poroscale/vec2.hpp"

namespace poroscale {

// Symmetric effective tensor with the raw asymmetry of its construction kept
// for diagnostics (solver-residual sized for the flux-form quadratures).
struct EffectiveTensor {
  Mat2 m;             // symmetrized
  double asym = 0.0;  // |m12 - m21| before symmetrization

  static EffectiveTensor from_raw(const Mat2& raw) {
    EffectiveTensor t;
    t.m = raw.sym();
    t.asym = raw.a12 > raw.a21 ? raw.a12 - raw.a21 : raw.a21 - raw.a12;
    return t;
  }

  double lambda_min() const {
    double lo, hi;
    sym_eigenvalues(m, lo, hi);
    return lo;
  }
};

}  // namespace poroscale
