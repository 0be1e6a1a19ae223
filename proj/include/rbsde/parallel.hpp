#pragma once

namespace rbsde {

/// Execution mode of the data-parallel kernels. `serial` is the reference
/// implementation; `parallel` runs the same per-element code under OpenMP.
/// Results are bitwise identical in both modes (no cross-element state).
enum class Exec { serial, parallel };

/// Number of workers parallel kernels may use. Honors the RBSDE_THREADS
/// environment variable (read once) unless overridden by set_worker_cap.
int worker_count();

/// Override the worker count (0 restores the environment/default value).
/// Intended for tests and the benchmark driver.
void set_worker_cap(int cap);

namespace detail {
void run_indexed(Exec exec, int n, void* ctx, void (*fn)(void*, int));
}

/// Apply fn(i) for i in [0, n). Under Exec::parallel iterations run on
/// OpenMP workers; each iteration must only touch its own outputs.
template <typename Fn>
void parallel_for(Exec exec, int n, Fn&& fn) {
    detail::run_indexed(exec, n, &fn, [](void* ctx, int i) {
        (*static_cast<Fn*>(ctx))(i);
    });
}

} // namespace rbsde
