#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace rbsde {

/// splitmix64 step; used to derive independent per-path/per-sample seeds so
/// that parallel sampling is deterministic regardless of the worker count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream seed for item `index` of the run seeded with `seed`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    return splitmix64(s);
}

struct SampleStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t count = 0;
};

SampleStats summarize(const std::vector<double>& xs);

/// Least-squares slope of log(y) against log(x); pairs with y <= 0 are
/// dropped. Returns NaN when fewer than min_points usable pairs remain.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy,
                        std::size_t min_points = 4);

} // namespace rbsde
