// Timing comparison of the serial reference kernels against the OpenMP
// versions: reflected backward induction on large lattices and Monte Carlo
// path generation. Both modes must produce bitwise identical results; here
// we only time them and report the speedup.

#include "rbsde/lattice_engine.hpp"
#include "rbsde/montecarlo.hpp"
#include "rbsde/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

using namespace rbsde;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

LatticeProblem make_problem(int steps) {
    ProblemSpec spec{TimeGrid(1.0, steps), {}, {}, {}, {}};
    spec.driver.growth_k = 1.0;
    spec.driver.f = [](double, double y, double z) { return 0.5 * std::sin(y) - 0.1 * z; };
    spec.terminal.xi = [](double x) { return std::fmin(std::fmax(x, -0.5), 0.5); };
    spec.barriers.lower = BarrierSide::of([](double, double) { return -0.4; });
    spec.barriers.upper = BarrierSide::of([](double, double) { return 0.4; });
    return discretize(spec);
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_seconds();
        fn();
        const double dt = now_seconds() - t0;
        if (dt < best) best = dt;
    }
    return best;
}

} // namespace

int main() {
    std::printf("workers available: %d\n\n", worker_count());
    std::printf("%-34s %10s %10s %8s\n", "kernel", "serial(s)", "openmp(s)", "speedup");

    for (int steps : {500, 1000, 2000}) {
        const LatticeProblem problem = make_problem(steps);
        double y_serial = 0.0, y_parallel = 0.0;
        const double ts = time_best_of(3, [&] {
            y_serial = solve_reflected_oracle(problem, Exec::serial).y(0, 0);
        });
        const double tp = time_best_of(3, [&] {
            y_parallel = solve_reflected_oracle(problem, Exec::parallel).y(0, 0);
        });
        char label[64];
        std::snprintf(label, sizeof(label), "reflected oracle N=%d", steps);
        std::printf("%-34s %10.4f %10.4f %7.2fx%s\n", label, ts, tp, ts / tp,
                    y_serial == y_parallel ? "" : "  MISMATCH");
    }

    {
        const TimeGrid grid(1.0, 50);
        double checksum_serial = 0.0, checksum_parallel = 0.0;
        const double ts = time_best_of(3, [&] {
            const PathBundle b = simulate_paths(grid, 400000, 7, IncrementMode::gaussian,
                                                Exec::serial);
            checksum_serial = b.increments.back();
        });
        const double tp = time_best_of(3, [&] {
            const PathBundle b = simulate_paths(grid, 400000, 7, IncrementMode::gaussian,
                                                Exec::parallel);
            checksum_parallel = b.increments.back();
        });
        std::printf("%-34s %10.4f %10.4f %7.2fx%s\n", "path simulation 4e5 x 50", ts, tp,
                    ts / tp, checksum_serial == checksum_parallel ? "" : "  MISMATCH");
    }
    return 0;
}
