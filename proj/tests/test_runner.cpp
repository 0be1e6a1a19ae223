#include "rbsde/runner.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace rbsde;

namespace {

PenalizationSchedule small_sched() {
    PenalizationSchedule s;
    s.m = {4, 16, 64};
    s.n = {4, 16, 64};
    s.tie_p_to_m = true;
    return s;
}

} // namespace

TEST_CASE("schedule validation") {
    PenalizationSchedule s = small_sched();
    s.m = {16, 4};
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_sched();
    s.n.clear();
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_sched();
    s.tie_p_to_m = false;
    CHECK_THROWS_AS(s.validate(), Error); // empty p
    s.p = {2, 4};
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("inactive barriers: every cell equals the oracle") {
    ProblemSpec spec{TimeGrid(1.0, 20), {}, {}, {}, {}};
    spec.driver.growth_k = 1.0;
    spec.driver.f = [](double, double y, double) { return -0.5 * y; };
    spec.terminal.xi = [](double x) { return std::fmin(std::fmax(x, -0.3), 0.3); };
    spec.barriers.lower = BarrierSide::of([](double, double) { return -50.0; });
    spec.barriers.upper = BarrierSide::of([](double, double) { return 50.0; });
    const ConvergenceReport rep = run_schedule(discretize(spec), small_sched());
    CHECK(rep.cells.size() == 9);
    for (const auto& c : rep.cells) {
        CHECK(c.gap_vs_oracle == 0.0); // penalty terms never fire: bitwise equal
        CHECK(c.mono_viol_m == 0);
        CHECK(c.mono_viol_n == 0);
    }
}

TEST_CASE("toy sweep: zero monotonicity violations, decaying gap") {
    const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(50));
    const ConvergenceReport rep = run_schedule(problem, small_sched());
    CHECK(rep.cells.size() == 9);
    CHECK(rep.total_mono_viol_m == 0);
    CHECK(rep.total_mono_viol_n == 0);
    CHECK(rep.envelope_max_sum <= 10.0 * rep.oracle_bounds.sum());
    // gap decreases along the m row at the top n
    double prev = 1e300;
    for (const auto& c : rep.cells)
        if (c.n == 64.0) {
            CHECK(c.gap_vs_oracle < prev);
            prev = c.gap_vs_oracle;
        }
    // cells are sorted by key and keyed uniquely
    for (std::size_t i = 1; i < rep.cells.size(); ++i) {
        const auto& a = rep.cells[i - 1];
        const auto& b = rep.cells[i];
        CHECK((a.p < b.p || a.m < b.m || a.n < b.n));
    }
}

TEST_CASE("schedule solves are independent of cell execution order") {
    const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(30));
    PenalizationSchedule pair;
    pair.m = {16, 64};
    pair.n = {64};
    const ConvergenceReport batch = run_schedule(problem, pair);
    // solve the cells individually: same values
    PenalizationSchedule solo;
    solo.m = {64};
    solo.n = {64};
    const ConvergenceReport lone = run_schedule(problem, solo);
    CHECK(batch.cells[1].y0 == lone.cells[0].y0);
    CHECK(batch.cells[1].bounds.e_a_t2 == lone.cells[0].bounds.e_a_t2);
}

TEST_CASE("errors are tagged with the failing cell") {
    ProblemSpec spec{TimeGrid(1.0, 4), {}, {}, {}, {}};
    spec.driver.growth_k = 1.0;
    spec.driver.f = [](double, double y, double) { return 50.0 * std::exp(5.0 * y); };
    spec.terminal.xi = [](double) { return 5.0; };
    try {
        run_schedule(discretize(spec), small_sched());
        FAIL("expected StepDiverged");
    } catch (const StepDiverged& e) {
        CHECK(std::string(e.what()).find("cell (p=") != std::string::npos);
    }
}

TEST_CASE("approximant-backed schedule on a small lattice") {
    // y-only kinked driver; f_p with a coarse certified grid
    ProblemSpec spec{TimeGrid(1.0, 8), {}, {}, {}, {}};
    spec.driver.growth_k = 1.0;
    spec.driver.f = [](double, double y, double) { return std::sqrt(std::fabs(y)); };
    spec.terminal.xi = [](double x) { return std::fmin(std::fmax(x, -0.5), 0.5); };
    spec.barriers.lower = BarrierSide::of([](double, double) { return -0.6; });
    const LatticeProblem problem = discretize(spec);

    PenalizationSchedule sched;
    sched.m = {4, 8};
    sched.n = {8};
    sched.tie_p_to_m = true; // p = m = 4, 8 > K = 1
    RunOptions opts;
    ApproxParams params;
    params.step_h = 0.01;
    opts.approx = params;
    opts.approx_deps = DriverDeps::y_only;
    const ConvergenceReport rep = run_schedule(problem, sched, opts);
    CHECK(rep.cells.size() == 2);
    CHECK(rep.total_mono_viol_m == 0); // f_p ascending in p reinforces the m-monotonicity
    for (const auto& c : rep.cells) CHECK(std::isfinite(c.y0));
}

TEST_CASE("double limit study") {
    SUBCASE("inactive upper barrier: n columns constant") {
        const LatticeProblem problem = discretize(oracles::american_put_spec(1.0, 40));
        PenalizationSchedule sched;
        sched.m = {16, 64};
        sched.n = {4, 16, 64};
        const DoubleLimitReport rep = double_limit_study(problem, sched);
        for (const auto& row : rep.rows) {
            for (double y0 : row.y0_by_n) CHECK(y0 == row.y0_by_n.front());
            CHECK(row.last_n_gap == 0.0); // hybrid == penalized when U is absent
        }
    }
    SUBCASE("toy: intermediate matches the hybrid within 2/n, m-limit reaches the oracle") {
        const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(50));
        PenalizationSchedule sched;
        sched.m = {4, 16, 64, 256, 1024};
        sched.n = {4, 16, 64, 256, 1024};
        const DoubleLimitReport rep = double_limit_study(problem, sched);
        for (const auto& row : rep.rows) {
            CHECK(row.last_n_gap <= 2.0 / sched.n.back());
            CHECK(row.extrapolated_gap <= row.last_n_gap);
        }
        // hybrid intermediates ascend toward the oracle
        double prev = 1e300;
        for (const auto& row : rep.rows) {
            CHECK(row.hybrid_vs_oracle_gap < prev);
            prev = row.hybrid_vs_oracle_gap;
        }
        CHECK(rep.final_gap <= 1e-2);
    }
}

TEST_CASE("monotone limit conditions") {
    const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(40));
    std::vector<SolutionQuadruple> sweep;
    for (double m : {4.0, 16.0, 64.0, 256.0})
        sweep.push_back(solve_penalized(problem, PenalizedDriver{m, 64.0}));

    SUBCASE("identical runs pass trivially") {
        const std::vector<SolutionQuadruple> same(3, sweep[0]);
        const ConditionReport rep = monotone_limit_check(problem.lattice, same);
        CHECK(rep.all_ok());
    }
    SUBCASE("the m-sweep satisfies every discrete hypothesis") {
        const ConditionReport rep = monotone_limit_check(problem.lattice, sweep);
        CHECK(rep.all_ok());
        bool saw_auto = false;
        for (const auto& e : rep.entries)
            if (e.id == "(v)") saw_auto = e.status == CheckStatus::auto_pass;
        CHECK(saw_auto);
    }
    SUBCASE("shuffled order fails (vi) with a located violation") {
        std::vector<SolutionQuadruple> shuffled{sweep[2], sweep[0], sweep[3], sweep[1]};
        const ConditionReport rep = monotone_limit_check(problem.lattice, shuffled);
        CHECK(!rep.all_ok());
        bool vi_failed = false;
        for (const auto& e : rep.entries)
            if (e.id == "(vi)" && e.status == CheckStatus::fail) {
                vi_failed = true;
                CHECK(e.detail.find("node (") != std::string::npos);
            }
        CHECK(vi_failed);
    }
    SUBCASE("mismatched lattices are rejected") {
        std::vector<SolutionQuadruple> bad = sweep;
        bad.push_back(solve_penalized(discretize(oracles::double_barrier_toy_spec(20)),
                                      PenalizedDriver{4.0, 4.0}));
        CHECK_THROWS_AS(monotone_limit_check(problem.lattice, bad), MismatchedLattices);
    }
}
