#pragma once

// Index-parallel loops.  workers <= 1 runs the serial reference loop; larger
// counts use an OpenMP static schedule.  Bodies must write only to their own
// index so both paths produce identical results.

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace fockforge {

template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(workers)
    for (long long i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    // Lowest failing index wins, as in the serial loop.
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace fockforge
