#pragma once

#include <cstddef>

#ifdef SCRISK_HAVE_OPENMP
#include <omp.h>
#endif

namespace scrisk {

// Execution policy for the data-parallel kernels. Every kernel that accepts
// an Exec must produce bit-identical results under Serial and Parallel;
// Serial is the reference path the tests compare against.
enum class Exec { Serial, Parallel };

template <typename Fn>
void parallel_for(std::size_t n, Exec exec, Fn&& fn) {
#ifdef SCRISK_HAVE_OPENMP
    if (exec == Exec::Parallel) {
        #pragma omp parallel for schedule(dynamic, 16)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)exec;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline int num_threads() {
#ifdef SCRISK_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace scrisk
