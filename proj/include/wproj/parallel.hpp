#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wproj {

enum class Parallelism { kSerial, kOpenMP };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs f(i) for i in [0, n). With kOpenMP the iterations are distributed
/// statically; every iteration must write only to its own output slot, which
/// keeps results identical to the serial order for any thread count.
template <typename F>
void parallel_for(std::size_t n, F&& f,
                  Parallelism par = Parallelism::kOpenMP) {
#ifdef _OPENMP
  if (par == Parallelism::kOpenMP && n > 1) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      f(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)par;
#endif
  for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace wproj
