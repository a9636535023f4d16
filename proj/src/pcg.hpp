#pragma once

// Preconditioned conjugate gradients on plain arrays. Dot products use the
// fixed-chunk deterministic reduction so results do not depend on the thread
// count.

#include <cmath>
#include <cstddef>
#include <vector>

#include "poroscale/parallel.hpp"

namespace poroscale {

struct CGResult {
  int iters = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

inline double dot_det(const std::vector<double>& a, const std::vector<double>& b) {
  return par_sum(static_cast<std::ptrdiff_t>(a.size()),
                 [&](std::ptrdiff_t i) { return a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)]; });
}

// Solves A x = b for SPD (or consistent semidefinite) A. matvec(x, y) writes
// y = A x; precond(r, z) writes z = M^-1 r (identity allowed). x holds the
// initial guess on entry. Terminates on ||r|| <= tol * ||b|| (absolute floor
// 1e-300 guards b = 0) or on stagnation of the preconditioned residual.
template <class MatVec, class Precond>
CGResult pcg(const MatVec& matvec, const Precond& precond, const std::vector<double>& b, std::vector<double>& x,
             double tol, int max_iters) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(b.size());
  std::vector<double> r(b.size()), z(b.size()), p(b.size()), ap(b.size());

  matvec(x, ap);
  par_for(n, [&](std::ptrdiff_t i) {
    r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - ap[static_cast<std::size_t>(i)];
  });
  const double bnorm = std::sqrt(dot_det(b, b));
  const double stop = tol * (bnorm > 0.0 ? bnorm : 1.0);

  double rnorm = std::sqrt(dot_det(r, r));
  CGResult res;
  if (rnorm <= stop) {
    res.converged = true;
    res.rel_residual = bnorm > 0.0 ? rnorm / bnorm : 0.0;
    return res;
  }

  precond(r, z);
  p = z;
  double rz = dot_det(r, z);

  for (int it = 0; it < max_iters; ++it) {
    matvec(p, ap);
    const double pap = dot_det(p, ap);
    if (!(pap > 0.0)) break;  // loss of positive definiteness in finite precision
    const double alpha = rz / pap;
    par_for(n, [&](std::ptrdiff_t i) {
      x[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] -= alpha * ap[static_cast<std::size_t>(i)];
    });
    rnorm = std::sqrt(dot_det(r, r));
    res.iters = it + 1;
    if (rnorm <= stop) {
      res.converged = true;
      break;
    }
    precond(r, z);
    const double rz_new = dot_det(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    par_for(n, [&](std::ptrdiff_t i) {
      p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
    });
  }
  res.rel_residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  return res;
}

}  // namespace poroscale
