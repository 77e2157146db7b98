#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace geodragon::par {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

// Index-disjoint parallel loop. Bodies must only write to slots derived from
// their own index so serial and parallel runs produce identical results.
template <class Body>
void parallel_for(std::int64_t n, const Body& body, bool parallel = true) {
#ifdef _OPENMP
  if (parallel && n > 1) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)parallel;
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace geodragon::par
