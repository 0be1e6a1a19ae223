#include "rbsde/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rbsde {

namespace {

int env_thread_cap() {
    const char* s = std::getenv("RBSDE_THREADS");
    if (!s) return 0;
    int v = std::atoi(s);
    return v > 0 ? v : 0;
}

std::atomic<int> g_cap{-1}; // -1: not initialized, 0: no cap

} // namespace

int worker_count() {
    int cap = g_cap.load(std::memory_order_relaxed);
    if (cap < 0) {
        cap = env_thread_cap();
        g_cap.store(cap, std::memory_order_relaxed);
    }
#ifdef _OPENMP
    int hw = omp_get_max_threads();
    return cap > 0 ? (cap < hw ? cap : hw) : hw;
#else
    return 1;
#endif
}

void set_worker_cap(int cap) {
    g_cap.store(cap > 0 ? cap : env_thread_cap(), std::memory_order_relaxed);
}

namespace detail {

void run_indexed(Exec exec, int n, void* ctx, void (*fn)(void*, int)) {
#ifdef _OPENMP
    if (exec == Exec::parallel && n > 1) {
        const int workers = worker_count();
#pragma omp parallel for schedule(static) num_threads(workers)
        for (int i = 0; i < n; ++i) fn(ctx, i);
        return;
    }
#endif
    (void)exec;
    for (int i = 0; i < n; ++i) fn(ctx, i);
}

} // namespace detail
} // namespace rbsde
