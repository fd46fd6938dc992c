#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace zl {

// Runs fn(i) for i in [0,n). workers <= 1 is the serial reference loop;
// otherwise OpenMP with dynamic scheduling. Results must be written to
// slot i by the callee so the merge order is fixed.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::mutex m;
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long long i = 0; i < nn; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lk(m);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

} // namespace zl
