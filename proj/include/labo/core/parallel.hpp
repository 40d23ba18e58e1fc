#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace labo {

// Process-wide switch between the OpenMP kernels and the serial reference
// path. Every parallel site in the project goes through parallel_for and
// writes to disjoint slots, so both modes produce bitwise-identical output;
// tests and the benchmark toggle this to compare them.
void set_parallel_enabled(bool on);
bool parallel_enabled();
int worker_count();

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
  if (parallel_enabled() && n > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace labo
