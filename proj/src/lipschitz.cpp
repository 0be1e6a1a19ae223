#include "rbsde/lipschitz.hpp"

#include <cmath>
#include <random>

namespace rbsde {

ApproxFamily::ApproxFamily(Driver base, std::vector<int> levels, DriverDeps deps,
                           ApproxParams params)
    : base_(std::move(base)), levels_(std::move(levels)), deps_(deps), params_(params) {
    for (int p : levels_)
        if (p <= base_.growth_k)
            throw LevelTooLow("approximation level " + std::to_string(p) +
                              " must exceed the growth constant");
    if (params_.tol_grid <= 0.0) throw Error("tol_grid must be positive");
    if (params_.step_h && *params_.step_h <= 0.0) throw Error("step_h must be positive");
}

double ApproxFamily::grid_step(int p) const {
    if (params_.step_h) return *params_.step_h;
    return params_.tol_grid / (p + base_.growth_k);
}

double ApproxFamily::inf_convolve(int p, double t, double y, double z) const {
    const double K = base_.growth_k;
    if (p <= K)
        throw LevelTooLow("level " + std::to_string(p) + " <= growth constant");
    const auto& f = base_.f;
    double best = f(t, y, z); // the query point itself: domination is exact

    if (deps_ == DriverDeps::none) return best;

    const double radius = 2.0 * K * (1.0 + std::fabs(y) + std::fabs(z)) / (p - K) + 1.0;
    const double h = grid_step(p);

    // grid anchored at multiples of h so that kinks at round coordinates
    // (e.g. the origin) are searched exactly
    const auto scan_1d = [&](double center, auto&& value_at) {
        const long k_lo = static_cast<long>(std::ceil((center - radius) / h));
        const long k_hi = static_cast<long>(std::floor((center + radius) / h));
        if (k_hi - k_lo + 1 > static_cast<long>(params_.max_points))
            throw SearchBudgetExceeded("inf-convolution grid too large; coarsen tol_grid");
        for (long i = k_lo; i <= k_hi; ++i) {
            const double u = static_cast<double>(i) * h;
            const double cand = value_at(u);
            if (cand < best) best = cand;
        }
    };

    switch (deps_) {
        case DriverDeps::none:
            return best;
        case DriverDeps::y_only:
            scan_1d(y, [&](double u) { return f(t, u, z) + p * std::fabs(y - u); });
            return best;
        case DriverDeps::z_only:
            scan_1d(z, [&](double v) { return f(t, y, v) + p * std::fabs(z - v); });
            return best;
        case DriverDeps::y_and_z: {
            const long ky_lo = static_cast<long>(std::ceil((y - radius) / h));
            const long ky_hi = static_cast<long>(std::floor((y + radius) / h));
            const long kz_lo = static_cast<long>(std::ceil((z - radius) / h));
            const long kz_hi = static_cast<long>(std::floor((z + radius) / h));
            const long ny = ky_hi - ky_lo + 1, nz = kz_hi - kz_lo + 1;
            if (ny > 0 && nz > 0 &&
                static_cast<unsigned long>(ny) * static_cast<unsigned long>(nz) >
                    params_.max_points)
                throw SearchBudgetExceeded("inf-convolution grid too large; coarsen tol_grid");
            for (long iy = ky_lo; iy <= ky_hi; ++iy) {
                const double u = static_cast<double>(iy) * h;
                const double dy = std::fabs(y - u);
                if (dy > radius) continue;
                for (long iz = kz_lo; iz <= kz_hi; ++iz) {
                    const double v = static_cast<double>(iz) * h;
                    const double dz = std::fabs(z - v);
                    if (dy + dz > radius) continue; // L1 ball
                    const double cand = f(t, u, v) + p * (dy + dz);
                    if (cand < best) best = cand;
                }
            }
            return best;
        }
    }
    return best;
}

LipschitzProbeReport lipschitz_probe(const ApproxFamily& family, int p,
                                     const std::vector<std::pair<Point3, Point3>>& pairs) {
    LipschitzProbeReport rep;
    rep.additive_slack = 2.0 * family.grid_slack(p);
    for (const auto& [a, b] : pairs) {
        const double fa = family.inf_convolve(p, a.t, a.y, a.z);
        const double fb = family.inf_convolve(p, b.t, b.y, b.z);
        const double dist = std::fabs(a.y - b.y) + std::fabs(a.z - b.z);
        if (dist <= 0.0) continue;
        const double df = std::fabs(fa - fb);
        const double ratio = df / dist;
        if (ratio > rep.max_ratio) rep.max_ratio = ratio;
        const double excess = df - p * dist - rep.additive_slack;
        if (excess > rep.max_excess) rep.max_excess = excess;
    }
    rep.pass = rep.max_excess <= 0.0;
    return rep;
}

std::vector<std::pair<Point3, Point3>> make_probe_pairs(int count, std::uint64_t seed,
                                                        double min_separation, double box) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-box, box);
    std::vector<std::pair<Point3, Point3>> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    while (pairs.size() < static_cast<std::size_t>(count)) {
        Point3 a{0.0, unif(rng), unif(rng)};
        Point3 b{0.0, unif(rng), unif(rng)};
        if (std::fabs(a.y - b.y) + std::fabs(a.z - b.z) < min_separation) continue;
        pairs.emplace_back(a, b);
    }
    return pairs;
}

MonotonicityProbeReport monotonicity_probe(const ApproxFamily& family,
                                           const std::vector<Point3>& points) {
    if (family.levels().size() < 2)
        throw Error("monotonicity probe needs at least two levels");
    MonotonicityProbeReport rep;
    const auto& levels = family.levels();
    rep.gap_by_level.reserve(levels.size());
    std::vector<double> prev(points.size());
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const int p = levels[li];
        double max_gap = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Point3& pt = points[i];
            const double fp = family.inf_convolve(p, pt.t, pt.y, pt.z);
            const double fv = family.base().f(pt.t, pt.y, pt.z);
            if (fp > fv + 1e-12) ++rep.domination_violations;
            if (li > 0) {
                // estimates sit below the true values by at most the grid
                // slack of their own level
                const double slack = family.grid_slack(levels[li - 1]);
                if (prev[i] > fp + slack) ++rep.ascent_violations;
            }
            const double gap = fv - fp;
            if (gap > max_gap) max_gap = gap;
            prev[i] = fp;
        }
        rep.gap_by_level.emplace_back(static_cast<double>(p), max_gap);
        if (li + 1 == levels.size()) rep.max_gap_top_level = max_gap;
    }
    return rep;
}

} // namespace rbsde
