#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include "bistress/linalg.hpp"

namespace bistress {

// Execution policy for the data-parallel sweeps (quadrature nodes, sample
// points, suite checks). `serial` is the reference path kept for testing;
// results are bit-identical because each slot is computed by the same
// floating-point program and reductions use a fixed pairwise tree.
enum class Exec { serial, parallel };

namespace detail {
template <class F>
void run_indexed_parallel(std::size_t n, const F& f) {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}
}  // namespace detail

// Runs f(i) for i in [0, n), serially or under OpenMP. f must be pure with
// respect to shared state except its own output slot.
template <class F>
void for_indexed(std::size_t n, const F& f, Exec exec) {
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) f(i);
    } else {
        detail::run_indexed_parallel(n, f);
    }
}

// Evaluates f(i) into a vector and reduces with the deterministic pairwise
// tree. The parallel and serial policies return bitwise-equal sums.
template <class F>
double map_reduce(std::size_t n, const F& f, Exec exec) {
    std::vector<double> vals(n);
    for_indexed(n, [&](std::size_t i) { vals[i] = f(i); }, exec);
    return pairwise_sum(vals);
}

}  // namespace bistress
