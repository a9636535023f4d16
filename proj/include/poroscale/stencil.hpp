#pragma once

// Periodic 5-point variable-coefficient stencil y = A x on an n x n cell
// grid. fx holds the east-face coefficient of cell (i, j), fy the north-face
// coefficient; row-major cell index j*n + i. The OpenMP version writes each
// output cell from exactly one iteration, so it is bitwise identical to the
// serial version for any thread count.

#include <cstddef>
#include <vector>

#include "poroscale/parallel.hpp"

namespace poroscale {

inline void periodic_stencil_apply(int n, const std::vector<double>& fx, const std::vector<double>& fy,
                                   const std::vector<double>& x, std::vector<double>& y) {
  par_for(static_cast<std::ptrdiff_t>(n) * n, [&](std::ptrdiff_t k) {
    const int j = static_cast<int>(k) / n;
    const int i = static_cast<int>(k) % n;
    const int ie = i + 1 == n ? 0 : i + 1;
    const int iw = i == 0 ? n - 1 : i - 1;
    const int jn = j + 1 == n ? 0 : j + 1;
    const int js = j == 0 ? n - 1 : j - 1;
    const std::size_t c = static_cast<std::size_t>(k);
    const double xc = x[c];
    y[c] = fx[c] * (xc - x[static_cast<std::size_t>(j * n + ie)]) +
           fx[static_cast<std::size_t>(j * n + iw)] * (xc - x[static_cast<std::size_t>(j * n + iw)]) +
           fy[c] * (xc - x[static_cast<std::size_t>(jn * n + i)]) +
           fy[static_cast<std::size_t>(js * n + i)] * (xc - x[static_cast<std::size_t>(js * n + i)]);
  });
}

}  // namespace poroscale
