#pragma once

// Execution policy for the data-parallel kernels. Every kernel has a serial
// reference path and an OpenMP path computing the same per-element
// expressions, so both produce bitwise-identical results.

#include <cstdlib>
#include <omp.h>

namespace qpwalk {

enum class Exec { serial, openmp };

// Worker cap: min(QPWALK_THREADS if set, omp_get_max_threads()).
inline int worker_count() {
    int n = omp_get_max_threads();
    if (const char* s = std::getenv("QPWALK_THREADS")) {
        int cap = std::atoi(s);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

inline Exec default_exec() { return Exec::openmp; }

} // namespace qpwalk
