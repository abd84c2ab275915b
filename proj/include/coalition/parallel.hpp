#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coalition {

enum class Exec { serial, parallel };

// Runs f(i) for i in [0, n). Parallel mode fans out over OpenMP threads when
// the library was built with OpenMP; callers must write results to disjoint
// per-index slots so both modes produce identical bytes.
template <class F>
void for_each_index(std::size_t n, Exec mode, F&& f) {
#ifdef _OPENMP
    if (mode == Exec::parallel && n > 1) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
            f(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)mode;
#endif
    for (std::size_t i = 0; i < n; ++i) f(i);
}

inline bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

} // namespace coalition
