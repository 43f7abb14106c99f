#pragma once

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meddial {

// Workers available to parallel stages; 1 when built without OpenMP.
inline int hardware_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Serial reference path. Kept separate so tests and the benchmark can compare
// it against the OpenMP path on identical inputs.
template <class T, class F>
auto map_indexed_serial(const std::vector<T>& items, F&& fn)
    -> std::vector<std::decay_t<decltype(fn(items[0]))>> {
    std::vector<std::decay_t<decltype(fn(items[0]))>> out(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) out[i] = fn(items[i]);
    return out;
}

// OpenMP path. Results land in index order, so output bytes do not depend on
// the schedule or worker count. The first exception thrown inside the region
// is captured and rethrown after the loop.
template <class T, class F>
auto map_indexed_parallel(const std::vector<T>& items, int workers, F&& fn)
    -> std::vector<std::decay_t<decltype(fn(items[0]))>> {
    using R = std::decay_t<decltype(fn(items[0]))>;
    std::vector<R> out(items.size());
    std::exception_ptr first_error = nullptr;

#ifdef _OPENMP
    const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = fn(items[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical(meddial_map_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
#else
    (void)workers;
    for (std::size_t i = 0; i < items.size(); ++i) {
        try {
            out[i] = fn(items[i]);
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
            break;
        }
    }
#endif

    if (first_error) std::rethrow_exception(first_error);
    return out;
}

template <class T, class F>
auto map_indexed(const std::vector<T>& items, int workers, F&& fn)
    -> std::vector<std::decay_t<decltype(fn(items[0]))>> {
    if (workers <= 1 || items.size() < 2) return map_indexed_serial(items, fn);
    return map_indexed_parallel(items, workers, fn);
}

} // namespace meddial
