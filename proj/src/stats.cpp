#include "rbsde/stats.hpp"

#include <cmath>
#include <limits>

namespace rbsde {

SampleStats summarize(const std::vector<double>& xs) {
    SampleStats s;
    s.count = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return s;
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - s.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(xs.size() - 1);
    s.stderr_mean = std::sqrt(var / static_cast<double>(xs.size()));
    return s;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy,
                        std::size_t min_points) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : xy) {
        if (x > 0.0 && y > 0.0) pts.emplace_back(std::log(x), std::log(y));
    }
    if (pts.size() < min_points) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / denom;
}

} // namespace rbsde
