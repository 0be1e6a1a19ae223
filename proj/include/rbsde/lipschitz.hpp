#pragma once

#include "rbsde/model.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace rbsde {

struct LevelTooLow : Error {
    using Error::Error;
};

struct SearchBudgetExceeded : Error {
    using Error::Error;
};

/// Which arguments the base driver actually depends on. The inf-convolution
/// over (y, z) collapses exactly onto the dependent coordinates (the optimal
/// candidate takes the others at the query point), which turns the search
/// 1-D for the common y-only drivers.
enum class DriverDeps { none, y_only, z_only, y_and_z };

struct ApproxParams {
    double tol_grid = 1e-3;          // target grid error (p+K)*h
    std::optional<double> step_h;    // explicit grid step; overrides tol_grid
    std::size_t max_points = 20'000'000;
};

/// Family of Lipschitz approximants
///   f_p(t,y,z) = inf over (y',z') of  f(t,y',z') + p * |(y,z) - (y',z')|_1,
/// computed over a finite grid on the L1 ball of radius
/// R = 2K(1+|y|+|z|)/(p-K) + 1 around the query point (any minimizer lies
/// inside by the linear-growth bound). The grid is anchored at integer
/// multiples of h with the query point added, so f_p <= f holds exactly and
/// the true infimum lies within [result - (p+K)h, result].
class ApproxFamily {
public:
    ApproxFamily(Driver base, std::vector<int> levels, DriverDeps deps,
                 ApproxParams params = {});

    const Driver& base() const { return base_; }
    const std::vector<int>& levels() const { return levels_; }
    const ApproxParams& params() const { return params_; }

    double grid_step(int p) const;
    double grid_slack(int p) const { return (p + base_.growth_k) * grid_step(p); }

    double inf_convolve(int p, double t, double y, double z) const;

private:
    Driver base_;
    std::vector<int> levels_;
    DriverDeps deps_;
    ApproxParams params_;
};

struct Point3 {
    double t = 0.0, y = 0.0, z = 0.0;
};

struct LipschitzProbeReport {
    double max_ratio = 0.0;          // max |f_p(a)-f_p(b)| / |a-b|_1
    double additive_slack = 0.0;     // 2*(p+K)*h
    double max_excess = 0.0;         // max(|df| - p*d - slack), <= 0 when passing
    bool pass = false;
};

/// Probes the p-Lipschitz bound on point pairs: |f_p(a) - f_p(b)| must not
/// exceed p*|a-b|_1 by more than the grid-induced additive slack.
LipschitzProbeReport lipschitz_probe(const ApproxFamily& family, int p,
                                     const std::vector<std::pair<Point3, Point3>>& pairs);

/// Deterministic probe pairs with a minimum L1 separation.
std::vector<std::pair<Point3, Point3>> make_probe_pairs(int count, std::uint64_t seed,
                                                        double min_separation = 0.05,
                                                        double box = 3.0);

struct MonotonicityProbeReport {
    long ascent_violations = 0;      // f_p > f_q + slack for p < q
    long domination_violations = 0;  // f_p > f + 1e-12
    double max_gap_top_level = 0.0;  // max over points of f - f_pmax
    std::vector<std::pair<double, double>> gap_by_level; // (p, max gap)
    bool pass() const { return ascent_violations == 0 && domination_violations == 0; }
};

/// Checks monotone ascent across the family's levels and domination f_p <= f
/// at every probed point; records the per-level max gap for decay fitting.
MonotonicityProbeReport monotonicity_probe(const ApproxFamily& family,
                                           const std::vector<Point3>& points);

} // namespace rbsde
