#include "rbsde/montecarlo.hpp"

#include "rbsde/lattice_engine.hpp"
#include "rbsde/stats.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>

namespace rbsde {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// uniform in (0, 1], built from the top 53 bits of the engine output so the
// value stream is pinned by the generator alone
double unit_uniform(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

} // namespace

std::vector<double> PathBundle::positions() const {
    const int steps = grid.steps();
    std::vector<double> xs(static_cast<std::size_t>(n_paths) * (steps + 1), 0.0);
    for (int p = 0; p < n_paths; ++p) {
        double x = 0.0;
        const std::size_t row = static_cast<std::size_t>(p) * (steps + 1);
        xs[row] = 0.0;
        for (int k = 0; k < steps; ++k) {
            x += increment(p, k);
            xs[row + k + 1] = x;
        }
    }
    return xs;
}

PathBundle simulate_paths(const TimeGrid& grid, int n_paths, std::uint64_t seed,
                          IncrementMode mode, Exec exec) {
    if (n_paths < 1) throw Error("n_paths must be >= 1");
    PathBundle bundle{grid, n_paths, mode, seed, {}};
    const int steps = grid.steps();
    const double sdt = std::sqrt(grid.dt());
    bundle.increments.assign(static_cast<std::size_t>(n_paths) * steps, 0.0);
    parallel_for(exec, n_paths, [&](int p) {
        std::uint64_t state = stream_seed(seed, static_cast<std::uint64_t>(p));
        const std::size_t row = static_cast<std::size_t>(p) * steps;
        for (int k = 0; k < steps; ++k) {
            if (mode == IncrementMode::coin) {
                bundle.increments[row + k] = (splitmix64(state) >> 63) ? sdt : -sdt;
            } else {
                const double u1 = unit_uniform(splitmix64(state));
                const double u2 = unit_uniform(splitmix64(state));
                const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
                bundle.increments[row + k] = g * sdt;
            }
        }
    });
    return bundle;
}

LeastSquaresFit fit_least_squares(const std::vector<double>& design_rowmajor, int rows,
                                  int cols, const std::vector<double>& rhs) {
    if (rows < cols)
        throw SingularRegression("fewer samples than basis columns (" + std::to_string(rows) +
                                 " < " + std::to_string(cols) + ")");
    Eigen::MatrixXd a(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            a(r, c) = design_rowmajor[static_cast<std::size_t>(r) * cols + c];
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), rows);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank == 0) throw SingularRegression("design matrix has rank zero");
    const Eigen::VectorXd x = qr.solve(b);
    LeastSquaresFit fit;
    fit.rank = rank;
    fit.coeffs.assign(x.data(), x.data() + cols);
    return fit;
}

namespace {

struct StepRegression {
    std::vector<double> fitted_c; // E[Y_{k+1} | x_k] per path
    std::vector<double> fitted_z; // E[Y_{k+1} dB / dt | x_k] per path
};

// design matrix: powers of x up to `degree`, zero/duplicate columns removed;
// optional second-stage barrier feature pos(L - c_hat)
StepRegression regress_step(const std::vector<double>& x, const std::vector<double>& y_next,
                            const std::vector<double>& y_db_dt, const RegressionBasis& basis,
                            double t, const BarrierSide* lower) {
    const int n = static_cast<int>(x.size());
    const int degree = std::max(0, basis.degree);

    std::vector<std::vector<double>> cols;
    cols.reserve(static_cast<std::size_t>(degree) + 2);
    std::vector<double> col(static_cast<std::size_t>(n), 1.0);
    cols.push_back(col);
    for (int d = 1; d <= degree; ++d) {
        for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] *= x[static_cast<std::size_t>(i)];
        bool zero = true, dup = false;
        for (double v : col)
            if (v != 0.0) { zero = false; break; }
        for (const auto& existing : cols)
            if (existing == col) { dup = true; break; }
        if (!zero && !dup) cols.push_back(col);
    }

    const auto run_fit = [&](const std::vector<std::vector<double>>& columns,
                             const std::vector<double>& rhs) {
        const int c = static_cast<int>(columns.size());
        std::vector<double> design(static_cast<std::size_t>(n) * c);
        for (int r = 0; r < n; ++r)
            for (int cc = 0; cc < c; ++cc)
                design[static_cast<std::size_t>(r) * c + cc] = columns[static_cast<std::size_t>(cc)][static_cast<std::size_t>(r)];
        const LeastSquaresFit fit = fit_least_squares(design, n, c, rhs);
        std::vector<double> fitted(static_cast<std::size_t>(n), 0.0);
        for (int cc = 0; cc < c; ++cc) {
            const double coef = fit.coeffs[static_cast<std::size_t>(cc)];
            if (coef == 0.0) continue;
            const auto& column = columns[static_cast<std::size_t>(cc)];
            for (int r = 0; r < n; ++r) fitted[static_cast<std::size_t>(r)] += coef * column[static_cast<std::size_t>(r)];
        }
        return fitted;
    };

    StepRegression out;
    out.fitted_c = run_fit(cols, y_next);
    if (basis.barrier_feature && lower && lower->present()) {
        std::vector<double> feature(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            feature[static_cast<std::size_t>(i)] =
                positive_part(lower->value(t, x[static_cast<std::size_t>(i)]) -
                              out.fitted_c[static_cast<std::size_t>(i)]);
        bool informative = false;
        for (double v : feature)
            if (v != 0.0) { informative = true; break; }
        if (informative) {
            cols.push_back(feature);
            out.fitted_c = run_fit(cols, y_next);
        }
    }
    out.fitted_z = run_fit(cols, y_db_dt);
    return out;
}

McSolution solve_mc(const PathBundle& bundle, const McProblem& problem, double m, double n,
                    const RegressionBasis& basis, Exec exec) {
    const int steps = bundle.grid.steps();
    const int paths = bundle.n_paths;
    const double dt = bundle.grid.dt();

    const std::vector<double> xs = bundle.positions();
    const auto x_at = [&](int path, int k) {
        return xs[static_cast<std::size_t>(path) * (steps + 1) + k];
    };

    McSolution sol;
    sol.path_y.assign(static_cast<std::size_t>(paths) * (steps + 1), 0.0);
    const auto y_at = [&](int path, int k) -> double& {
        return sol.path_y[static_cast<std::size_t>(path) * (steps + 1) + k];
    };

    std::vector<double> a_cum(static_cast<std::size_t>(paths), 0.0);
    std::vector<double> k_cum(static_cast<std::size_t>(paths), 0.0);
    std::vector<double> z2_cum(static_cast<std::size_t>(paths), 0.0);
    std::vector<double> drift_cum(static_cast<std::size_t>(paths), 0.0);

    for (int p = 0; p < paths; ++p) y_at(p, steps) = problem.terminal.xi(x_at(p, steps));

    std::vector<double> x_k(static_cast<std::size_t>(paths));
    std::vector<double> y_next(static_cast<std::size_t>(paths));
    std::vector<double> y_db(static_cast<std::size_t>(paths));

    const bool has_lower = problem.barriers.lower.present();
    const bool has_upper = problem.barriers.upper.present();

    for (int k = steps - 1; k >= 0; --k) {
        const double t = bundle.grid.time_at(k);
        for (int p = 0; p < paths; ++p) {
            x_k[static_cast<std::size_t>(p)] = x_at(p, k);
            y_next[static_cast<std::size_t>(p)] = y_at(p, k + 1);
            y_db[static_cast<std::size_t>(p)] = y_at(p, k + 1) * bundle.increment(p, k) / dt;
        }
        const StepRegression reg =
            regress_step(x_k, y_next, y_db, basis, t,
                         basis.barrier_feature ? &problem.barriers.lower : nullptr);

        std::atomic<bool> diverged{false};
        parallel_for(exec, paths, [&](int p) {
            const std::size_t pi = static_cast<std::size_t>(p);
            const double c = reg.fitted_c[pi];
            const double z = reg.fitted_z[pi];
            const double x = x_k[pi];
            const double lo = has_lower ? problem.barriers.lower.value(t, x) : 0.0;
            const double up = has_upper ? problem.barriers.upper.value(t, x) : 0.0;
            const auto g = [&](double yy) {
                double v = problem.driver.f(t, yy, z);
                if (has_lower) v += m * positive_part(lo - yy);
                if (has_upper) v -= n * positive_part(yy - up);
                return v;
            };
            double pad = problem.driver.growth_k * (1.0 + std::fabs(c) + std::fabs(z)) + 1.0;
            if (has_lower) pad += m * std::fabs(lo - c);
            if (has_upper) pad += n * std::fabs(c - up);
            const StepSolution step = detail::solve_scalar_step(c, dt, g, dt * pad);
            if (!step.converged) diverged.store(true, std::memory_order_relaxed);
            y_at(p, k) = step.y;
            const double da = has_lower ? dt * m * positive_part(lo - step.y) : 0.0;
            const double dk = has_upper ? dt * n * positive_part(step.y - up) : 0.0;
            a_cum[pi] += da;
            k_cum[pi] += dk;
            z2_cum[pi] += z * z * dt;
            drift_cum[pi] += dt * problem.driver.f(t, step.y, z) + da - dk;
        });
        if (diverged.load())
            throw StepDiverged("regression step failed at time index " + std::to_string(k));
    }

    sol.y0 = y_at(0, 0);

    std::vector<double> pathwise(static_cast<std::size_t>(paths));
    std::vector<double> a_t(static_cast<std::size_t>(paths)), a_t2(static_cast<std::size_t>(paths));
    std::vector<double> k_t(static_cast<std::size_t>(paths)), k_t2(static_cast<std::size_t>(paths));
    std::vector<double> sup_y2(static_cast<std::size_t>(paths));
    for (int p = 0; p < paths; ++p) {
        const std::size_t pi = static_cast<std::size_t>(p);
        pathwise[pi] = y_at(p, steps) + drift_cum[pi];
        a_t[pi] = a_cum[pi];
        a_t2[pi] = a_cum[pi] * a_cum[pi];
        k_t[pi] = k_cum[pi];
        k_t2[pi] = k_cum[pi] * k_cum[pi];
        double sup = 0.0;
        for (int k = 0; k <= steps; ++k) {
            const double v = y_at(p, k);
            if (v * v > sup) sup = v * v;
        }
        sup_y2[pi] = sup;
    }
    const SampleStats pw = summarize(pathwise);
    sol.y0_stderr = pw.stderr_mean;
    const auto stat = [](const std::vector<double>& v) {
        const SampleStats s = summarize(v);
        return McStatistic{s.mean, s.stderr_mean};
    };
    sol.e_a_t = stat(a_t);
    sol.e_a_t2 = stat(a_t2);
    sol.e_k_t = stat(k_t);
    sol.e_k_t2 = stat(k_t2);
    sol.e_sup_y2 = stat(sup_y2);
    sol.e_int_z2 = stat(z2_cum);
    return sol;
}

} // namespace

McSolution solve_bsde_mc(const PathBundle& bundle, const McProblem& problem,
                         const RegressionBasis& basis, Exec exec) {
    McProblem plain = problem;
    plain.barriers = BarrierPair{}; // barriers ignored for the plain BSDE
    return solve_mc(bundle, plain, 0.0, 0.0, basis, exec);
}

McSolution solve_penalized_mc(const PathBundle& bundle, const McProblem& problem, double m,
                              double n, const RegressionBasis& basis, Exec exec) {
    if (m < 0.0 || n < 0.0) throw InvalidPenalty("penalty coefficients must be nonnegative");
    return solve_mc(bundle, problem, m, n, basis, exec);
}

} // namespace rbsde
