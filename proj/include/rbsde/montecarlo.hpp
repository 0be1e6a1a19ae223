#pragma once

#include "rbsde/model.hpp"
#include "rbsde/parallel.hpp"

#include <cstdint>
#include <vector>

namespace rbsde {

struct SingularRegression : Error {
    using Error::Error;
};

enum class IncrementMode { coin, gaussian };

/// Simulated Brownian increments, one row of `steps` increments per path.
/// Bit-exactly reproducible from the seed: each path draws from its own
/// splitmix-derived stream, so generation parallelizes deterministically.
struct PathBundle {
    TimeGrid grid;
    int n_paths = 0;
    IncrementMode mode = IncrementMode::coin;
    std::uint64_t seed = 0;
    std::vector<double> increments; // row-major, n_paths x steps

    double increment(int path, int step) const {
        return increments[static_cast<std::size_t>(path) * grid.steps() + step];
    }

    /// Brownian positions per path (n_paths x (steps+1), row-major).
    std::vector<double> positions() const;
};

PathBundle simulate_paths(const TimeGrid& grid, int n_paths, std::uint64_t seed,
                          IncrementMode mode = IncrementMode::coin,
                          Exec exec = Exec::parallel);

/// Polynomial regression basis in the state x, optionally augmented with a
/// barrier-distance feature pos(L(t,x) - c(x)) built from a first-stage
/// polynomial fit of the continuation value.
struct RegressionBasis {
    int degree = 4;
    bool barrier_feature = false;
};

/// Least-squares fit by rank-revealing column-pivoted QR; columns whose
/// pivot falls below 1e-10 of the largest are dropped (coefficient zero).
/// Exposed for the residual-orthogonality tests.
struct LeastSquaresFit {
    std::vector<double> coeffs;
    int rank = 0;
};
LeastSquaresFit fit_least_squares(const std::vector<double>& design_rowmajor, int rows,
                                  int cols, const std::vector<double>& rhs);

/// Driver/barrier/terminal closures for the Monte Carlo engine (plain
/// functions of (t,y,z) / (t,x) / x).
struct McProblem {
    Driver driver;
    BarrierPair barriers;
    TerminalCondition terminal;
};

struct McStatistic {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

struct McSolution {
    double y0 = 0.0;
    double y0_stderr = 0.0;     // spread of the pathwise accumulation value
    std::vector<double> path_y; // n_paths x (steps+1), row-major
    McStatistic e_a_t, e_k_t, e_a_t2, e_k_t2, e_sup_y2, e_int_z2;

    double path_value(int path, int step, int steps) const {
        return path_y[static_cast<std::size_t>(path) * (steps + 1) + step];
    }
};

/// Least-squares Monte Carlo backward solver with the same semi-implicit
/// scalar step as the lattice engine; conditional expectations of Y and of
/// Y*dB/dt are estimated by regression on the basis.
McSolution solve_bsde_mc(const PathBundle& bundle, const McProblem& problem,
                         const RegressionBasis& basis, Exec exec = Exec::parallel);

/// Penalized variant: adds the penalty terms to the step and accumulates the
/// per-path compensators; the quadruple statistics come back with standard
/// errors.
McSolution solve_penalized_mc(const PathBundle& bundle, const McProblem& problem, double m,
                              double n, const RegressionBasis& basis,
                              Exec exec = Exec::parallel);

} // namespace rbsde
