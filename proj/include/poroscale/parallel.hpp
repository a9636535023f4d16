#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace poroscale {

// Parallel loop over [0, n). The body must only write locations owned by its
// own index; no ordering between iterations is guaranteed.
template <class F>
void par_for(std::ptrdiff_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#else
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#endif
}

// Deterministic reduction: terms are accumulated within fixed-size chunks and
// the chunk partials are summed in index order, so the result is bitwise
// independent of the thread count.
inline constexpr std::ptrdiff_t kSumChunk = 1024;

template <class F>
double par_sum(std::ptrdiff_t n, F&& term) {
  if (n <= 0) return 0.0;
  const std::ptrdiff_t nchunks = (n + kSumChunk - 1) / kSumChunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
  par_for(nchunks, [&](std::ptrdiff_t c) {
    const std::ptrdiff_t lo = c * kSumChunk;
    const std::ptrdiff_t hi = lo + kSumChunk < n ? lo + kSumChunk : n;
    double acc = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(c)] = acc;
  });
  double total = 0.0;
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) total += partial[static_cast<std::size_t>(c)];
  return total;
}

// Deterministic max over [0, n).
template <class F>
double par_max(std::ptrdiff_t n, F&& term) {
  if (n <= 0) return 0.0;
  const std::ptrdiff_t nchunks = (n + kSumChunk - 1) / kSumChunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
  par_for(nchunks, [&](std::ptrdiff_t c) {
    const std::ptrdiff_t lo = c * kSumChunk;
    const std::ptrdiff_t hi = lo + kSumChunk < n ? lo + kSumChunk : n;
    double acc = term(lo);
    for (std::ptrdiff_t i = lo + 1; i < hi; ++i) {
      const double t = term(i);
      if (t > acc) acc = t;
    }
    partial[static_cast<std::size_t>(c)] = acc;
  });
  double total = partial[0];
  for (std::ptrdiff_t c = 1; c < nchunks; ++c)
    if (partial[static_cast<std::size_t>(c)] > total) total = partial[static_cast<std::size_t>(c)];
  return total;
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_thread_count(int k) {
#ifdef _OPENMP
  if (k > 0) omp_set_num_threads(k);
#else
  (void)k;
#endif
}

}  // namespace poroscale
