#pragma once

#include "rbsde/common.hpp"
#include "rbsde/stats.hpp"

#include <cstdint>
#include <vector>

namespace rbsde {

struct InvalidGrid : Error {
    using Error::Error;
};

/// Uniform time grid t_k = T*k/N on [0, T]. Grid points are computed as
/// horizon*k/steps so that t_0 = 0 and t_N = T hold exactly.
class TimeGrid {
public:
    TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
        if (!(horizon > 0.0)) throw InvalidGrid("horizon must be positive");
        if (steps < 1) throw InvalidGrid("steps must be >= 1");
    }

    double horizon() const { return horizon_; }
    int steps() const { return steps_; }
    double dt() const { return horizon_ / steps_; }
    double time_at(int k) const { return horizon_ * k / steps_; }

private:
    double horizon_;
    int steps_;
};

struct LatticeNode {
    int k = 0; // time level, 0..N
    int j = 0; // up-moves, 0..k
    double t = 0.0;
    double x = 0.0; // Brownian value (2j - k) * sqrt(dt)
};

/// Recombining binomial lattice for scalar Brownian motion. Node (k, j) has
/// successors (k+1, j) and (k+1, j+1), each with probability 1/2; the
/// Brownian increment over one step is +-sqrt(dt).
class Lattice {
public:
    explicit Lattice(TimeGrid grid);

    const TimeGrid& grid() const { return grid_; }
    int steps() const { return grid_.steps(); }
    double dt() const { return grid_.dt(); }
    double sqrt_dt() const { return sqrt_dt_; }

    int nodes_at(int k) const { return k + 1; }
    std::size_t node_count() const {
        const std::size_t n = static_cast<std::size_t>(steps());
        return (n + 1) * (n + 2) / 2;
    }

    double brownian_at(int k, int j) const { return (2 * j - k) * sqrt_dt_; }

    LatticeNode node(int k, int j) const {
        return LatticeNode{k, j, grid_.time_at(k), brownian_at(k, j)};
    }

private:
    TimeGrid grid_;
    double sqrt_dt_;
};

Lattice build_lattice(const TimeGrid& grid);

/// Triangular per-node storage over a lattice with the given step count;
/// entry (k, j) for 0 <= j <= k <= steps.
template <typename T>
class NodeField {
public:
    NodeField() = default;
    explicit NodeField(int steps, T init = T{})
        : steps_(steps),
          data_(static_cast<std::size_t>(steps + 1) * (steps + 2) / 2, init) {}

    int steps() const { return steps_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int k, int j) { return data_[offset(k) + j]; }
    const T& operator()(int k, int j) const { return data_[offset(k) + j]; }

    const std::vector<T>& raw() const { return data_; }
    std::vector<T>& raw() { return data_; }

    friend bool operator==(const NodeField& a, const NodeField& b) {
        return a.steps_ == b.steps_ && a.data_ == b.data_;
    }

private:
    static std::size_t offset(int k) {
        return static_cast<std::size_t>(k) * (k + 1) / 2;
    }

    int steps_ = -1;
    std::vector<T> data_;
};

/// A barrier value at a node; present == false means unbounded on that side.
struct Bound {
    double value = 0.0;
    bool present = false;
};

/// Node probabilities under the (1/2, 1/2) branch weights (forward sweep).
NodeField<double> node_probabilities(const Lattice& lattice);

/// Expectation of a terminal payoff vector (size steps+1) under the tree law.
double terminal_expectation(const Lattice& lattice, const std::vector<double>& values);

/// First and second moment of the pathwise terminal cumulant S_T = sum of
/// the per-node increments along a path. Exact forward sweep: the increment
/// accrued while stepping away from a node is determined by that node, so
/// conditional moments of the running sum propagate level by level.
struct CumulantMoments {
    double mean = 0.0;   // E[S_T]
    double second = 0.0; // E[S_T^2]
};
CumulantMoments pathwise_cumulant_moments(const Lattice& lattice,
                                          const NodeField<double>& increments);

/// E[S_{t_k}] for k = 0..N (S as above, accumulated before the level-k step).
std::vector<double> expected_cumulant_curve(const Lattice& lattice,
                                            const NodeField<double>& increments);

/// Max over lattice paths of |sum_k term(k, j_k)|, exhaustive when
/// steps <= exhaustive_limit (2^N paths), otherwise over sampled paths.
double max_abs_path_sum(const Lattice& lattice, const NodeField<double>& term,
                        int exhaustive_limit = 12, int n_samples = 10000,
                        std::uint64_t seed = 0x51D);

/// Mean and standard error of max_k field(k, j_k)^2 over sampled paths.
SampleStats sampled_sup_square(const Lattice& lattice, const NodeField<double>& field,
                               int n_samples = 10000, std::uint64_t seed = 0x51D);

} // namespace rbsde
