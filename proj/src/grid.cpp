#include "rbsde/grid.hpp"

#include <cmath>
#include <random>

namespace rbsde {

Lattice::Lattice(TimeGrid grid) : grid_(grid), sqrt_dt_(std::sqrt(grid.dt())) {}

Lattice build_lattice(const TimeGrid& grid) { return Lattice(grid); }

NodeField<double> node_probabilities(const Lattice& lattice) {
    const int n = lattice.steps();
    NodeField<double> prob(n, 0.0);
    prob(0, 0) = 1.0;
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double half = 0.5 * prob(k, j);
            prob(k + 1, j) += half;
            prob(k + 1, j + 1) += half;
        }
    }
    return prob;
}

double terminal_expectation(const Lattice& lattice, const std::vector<double>& values) {
    const int n = lattice.steps();
    const NodeField<double> prob = node_probabilities(lattice);
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) sum += prob(n, j) * values[static_cast<std::size_t>(j)];
    return sum;
}

CumulantMoments pathwise_cumulant_moments(const Lattice& lattice,
                                          const NodeField<double>& increments) {
    const int n = lattice.steps();
    // w = P(node), u = E[S 1_node], v = E[S^2 1_node], S accumulated up to k
    NodeField<double> w(n, 0.0), u(n, 0.0), v(n, 0.0);
    w(0, 0) = 1.0;
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double d = increments(k, j);
            const double w2 = 0.5 * w(k, j);
            const double u2 = 0.5 * (u(k, j) + w(k, j) * d);
            const double v2 = 0.5 * (v(k, j) + 2.0 * u(k, j) * d + w(k, j) * d * d);
            for (int c = 0; c < 2; ++c) {
                w(k + 1, j + c) += w2;
                u(k + 1, j + c) += u2;
                v(k + 1, j + c) += v2;
            }
        }
    }
    CumulantMoments m;
    for (int j = 0; j <= n; ++j) {
        m.mean += u(n, j);
        m.second += v(n, j);
    }
    return m;
}

std::vector<double> expected_cumulant_curve(const Lattice& lattice,
                                            const NodeField<double>& increments) {
    const int n = lattice.steps();
    NodeField<double> w(n, 0.0), u(n, 0.0);
    w(0, 0) = 1.0;
    std::vector<double> curve(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k < n; ++k) {
        double level = 0.0;
        for (int j = 0; j <= k; ++j) level += u(k, j);
        curve[static_cast<std::size_t>(k)] = level;
        for (int j = 0; j <= k; ++j) {
            const double d = increments(k, j);
            const double w2 = 0.5 * w(k, j);
            const double u2 = 0.5 * (u(k, j) + w(k, j) * d);
            for (int c = 0; c < 2; ++c) {
                w(k + 1, j + c) += w2;
                u(k + 1, j + c) += u2;
            }
        }
    }
    double last = 0.0;
    for (int j = 0; j <= n; ++j) last += u(n, j);
    curve[static_cast<std::size_t>(n)] = last;
    return curve;
}

double max_abs_path_sum(const Lattice& lattice, const NodeField<double>& term,
                        int exhaustive_limit, int n_samples, std::uint64_t seed) {
    const int n = lattice.steps();
    double best = 0.0;
    if (n <= exhaustive_limit) {
        const std::uint64_t count = 1ULL << n;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            double sum = 0.0;
            int j = 0;
            for (int k = 0; k < n; ++k) {
                sum += term(k, j);
                j += static_cast<int>((mask >> k) & 1ULL);
            }
            const double a = std::fabs(sum);
            if (a > best) best = a;
        }
        return best;
    }
    for (int s = 0; s < n_samples; ++s) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
        double sum = 0.0;
        int j = 0;
        for (int k = 0; k < n; ++k) {
            sum += term(k, j);
            j += static_cast<int>(rng() >> 63);
        }
        const double a = std::fabs(sum);
        if (a > best) best = a;
    }
    return best;
}

SampleStats sampled_sup_square(const Lattice& lattice, const NodeField<double>& field,
                               int n_samples, std::uint64_t seed) {
    const int n = lattice.steps();
    std::vector<double> sups(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
        int j = 0;
        double sup = field(0, 0) * field(0, 0);
        for (int k = 1; k <= n; ++k) {
            j += static_cast<int>(rng() >> 63);
            const double v = field(k, j);
            if (v * v > sup) sup = v * v;
        }
        sups[static_cast<std::size_t>(s)] = sup;
    }
    return summarize(sups);
}

} // namespace rbsde
