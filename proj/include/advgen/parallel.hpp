#pragma once

#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace advgen {

// Deterministic data-parallel map: f(i) writes only to cell i of some
// preallocated output, so results are identical for any worker count.
// workers <= 1 runs the plain serial loop (the reference path used in tests
// and the benchmark); workers == 0 means "library default".
template <class F>
void parallel_for(int n, int workers, F&& f) {
#ifdef _OPENMP
    if (workers != 1 && n > 1) {
        if (workers > 0) {
#pragma omp parallel for schedule(static) num_threads(workers)
            for (int i = 0; i < n; ++i) f(i);
        } else {
#pragma omp parallel for schedule(static)
            for (int i = 0; i < n; ++i) f(i);
        }
        return;
    }
#endif
    for (int i = 0; i < n; ++i) f(i);
}

inline int hardware_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace advgen
