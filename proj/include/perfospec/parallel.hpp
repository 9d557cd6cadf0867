#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace perfospec {

/// Execution policy for the dual-path kernels. Serial is the reference
/// implementation; Parallel dispatches to the OpenMP variant when the build
/// has OpenMP, and falls back to the serial path otherwise.
enum class ExecPolicy { Serial, Parallel };

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

/// Static-schedule loop over [0, n). The body must only write state owned by
/// iteration i so that both policies produce identical results.
template <class F>
void parallel_for(std::int64_t n, const F& body, ExecPolicy policy = ExecPolicy::Parallel) {
  if (policy == ExecPolicy::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
#endif
  }
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

/// Dynamic-schedule variant for uneven task costs (study grid cells).
template <class F>
void parallel_for_dynamic(std::int64_t n, const F& body, int num_threads,
                          ExecPolicy policy = ExecPolicy::Parallel) {
  if (policy == ExecPolicy::Parallel && num_threads != 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads > 0 ? num_threads : omp_get_max_threads())
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
#endif
  }
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace perfospec
