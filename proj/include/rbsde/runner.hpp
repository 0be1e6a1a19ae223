#pragma once

#include "rbsde/diagnostics.hpp"
#include "rbsde/lipschitz.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rbsde {

struct MismatchedLattices : Error {
    using Error::Error;
};

/// Sweep schedule over the approximation level p and the penalty
/// coefficients (m, n). With tie_p_to_m the p list is ignored and p = m
/// cell-wise, mirroring a single shared index.
struct PenalizationSchedule {
    std::vector<int> p;
    std::vector<double> m;
    std::vector<double> n;
    bool tie_p_to_m = true;

    void validate() const; // nonempty, strictly ascending, positive
};

struct ScheduleCell {
    int p = 0;
    double m = 0.0;
    double n = 0.0;
    double y0 = 0.0;
    BoundsRecord bounds;
    double gap_vs_oracle = 0.0;
    long mono_viol_m = 0; // node-wise violations vs the previous m cell
    long mono_viol_n = 0; // node-wise violations vs the previous n cell
};

struct ConvergenceReport {
    std::vector<ScheduleCell> cells; // sorted by (p, m, n)
    double oracle_y0 = 0.0;
    BoundsRecord oracle_bounds;
    double envelope_max_sum = 0.0;    // max over cells of the four-statistic sum
    double fitted_decay_slope = 0.0;  // log-log slope of gap vs m (NaN if < 4 pts)
    long total_mono_viol_m = 0;
    long total_mono_viol_n = 0;
};

struct RunOptions {
    /// Solve with the certified inf-convolution approximant f_p instead of
    /// the raw driver. The grid-search approximant costs O(radius/h) driver
    /// evaluations per call, so this is meant for small lattices; the raw
    /// driver is exact whenever f is already p-Lipschitz.
    std::optional<ApproxParams> approx;
    DriverDeps approx_deps = DriverDeps::y_and_z;
    PathSampling sampling;
    Exec exec = Exec::parallel;
    double mono_tol = 1e-10;
};

/// Solves every schedule cell on one fixed lattice, recording Y0, the
/// a-priori statistics, the gap to the clamped oracle and the node-wise
/// monotonicity violations (nondecreasing in m, nonincreasing in n).
ConvergenceReport run_schedule(const LatticeProblem& problem,
                               const PenalizationSchedule& schedule,
                               const RunOptions& opts = {});

struct DoubleLimitRow {
    double m = 0.0;
    std::vector<double> n_values;
    std::vector<double> y0_by_n;
    double extrapolated_y0 = 0.0;     // 1/n Richardson from the last two columns
    double hybrid_y0 = 0.0;           // upper-clamped / m-penalized intermediate
    double last_n_gap = 0.0;          // max node gap |Y^{n_max,m} - Y^{m,hybrid}|
    double extrapolated_gap = 0.0;    // |extrapolated_y0 - hybrid_y0|
    double hybrid_vs_oracle_gap = 0.0;
};

struct DoubleLimitReport {
    std::vector<DoubleLimitRow> rows; // ascending m
    double oracle_y0 = 0.0;
    double final_gap = 0.0; // |hybrid at largest m - oracle| at the root
};

/// The iterated limit: for each m, runs the ascending-n column, extrapolates
/// n to infinity, compares against the hybrid solver, then tracks the hybrid
/// intermediate toward the full clamped oracle as m grows.
DoubleLimitReport double_limit_study(const LatticeProblem& problem,
                                     const PenalizationSchedule& schedule,
                                     const RunOptions& opts = {});

struct ConditionEntry {
    std::string id;
    CheckStatus status = CheckStatus::pass;
    double worst = 0.0;
    std::string detail;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;
    bool all_ok() const {
        for (const auto& e : entries)
            if (e.status == CheckStatus::fail) return false;
        return true;
    }
};

/// Discrete analogs of the monotone-limit hypotheses for an ascending-index
/// family of quadruples on one lattice: increasing compensators with zero
/// start, increment domination across indices, bounded second moments,
/// monotone Y with bounded E[sup Y^2]; the weak-convergence hypothesis has
/// no finite-lattice content and is reported as auto-pass.
ConditionReport monotone_limit_check(const Lattice& lattice,
                                     const std::vector<SolutionQuadruple>& runs,
                                     const PathSampling& sampling = {});

} // namespace rbsde
