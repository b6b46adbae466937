#pragma once

// Static-schedule parallel map. Each index is visited exactly once and the
// callee must only write state owned by that index. An exception thrown by
// any index is rethrown on the caller (lowest index wins).

#include <exception>
#include <vector>

#if defined(SUBADMM_HAVE_OPENMP)
#include <omp.h>
#endif

namespace subadmm {

template <typename Fn>
void parallel_for(int n, Fn&& fn, int threads = 0) {
#if defined(SUBADMM_HAVE_OPENMP)
  const int team = threads > 0 ? threads : omp_get_max_threads();
  if (team > 1 && n > 1) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    bool failed = false;
#pragma omp parallel for schedule(static) num_threads(team) reduction(|| : failed)
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
    if (failed)
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return;
  }
#else
  (void)threads;
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace subadmm
