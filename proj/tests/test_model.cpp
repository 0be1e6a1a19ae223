#include "rbsde/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace rbsde;

namespace {

ProblemSpec basic_spec(double horizon, int steps) {
    ProblemSpec spec{TimeGrid(horizon, steps), {}, {}, {}, {}};
    spec.driver.growth_k = 1.0;
    spec.driver.f = [](double, double, double) { return 0.0; };
    spec.terminal.xi = [](double) { return 0.0; };
    return spec;
}

} // namespace

TEST_CASE("lattice geometry") {
    SUBCASE("T=1 N=1: 3 nodes, terminal -1/+1") {
        const Lattice l = build_lattice(TimeGrid(1.0, 1));
        CHECK(l.node_count() == 3);
        CHECK(l.brownian_at(1, 0) == doctest::Approx(-1.0));
        CHECK(l.brownian_at(1, 1) == doctest::Approx(1.0));
    }
    SUBCASE("T=1 N=2: 6 nodes, terminal {-2 sqrt(0.5), 0, 2 sqrt(0.5)}") {
        const Lattice l = build_lattice(TimeGrid(1.0, 2));
        CHECK(l.node_count() == 6);
        const double s = std::sqrt(0.5);
        CHECK(l.brownian_at(2, 0) == doctest::Approx(-2 * s));
        CHECK(l.brownian_at(2, 1) == 0.0);
        CHECK(l.brownian_at(2, 2) == doctest::Approx(2 * s));
    }
    SUBCASE("T=4 N=4: sqrt(dt)=1, terminal -4..4") {
        const Lattice l = build_lattice(TimeGrid(4.0, 4));
        for (int j = 0; j <= 4; ++j) CHECK(l.brownian_at(4, j) == doctest::Approx(2 * j - 4));
    }
    SUBCASE("invalid grids rejected") {
        CHECK_THROWS_AS(TimeGrid(1.0, 0), InvalidGrid);
        CHECK_THROWS_AS(TimeGrid(0.0, 5), InvalidGrid);
        CHECK_THROWS_AS(TimeGrid(-1.0, 5), InvalidGrid);
    }
    SUBCASE("time endpoints exact") {
        const TimeGrid g(1.0, 3);
        CHECK(g.time_at(0) == 0.0);
        CHECK(g.time_at(3) == 1.0);
    }
}

TEST_CASE("tree law is an exact martingale measure") {
    const Lattice l = build_lattice(TimeGrid(1.0, 200));
    const NodeField<double> prob = node_probabilities(l);

    // each level's probabilities sum to one
    double sum0 = 0.0;
    for (int j = 0; j <= 200; ++j) sum0 += prob(200, j);
    CHECK(sum0 == doctest::Approx(1.0).epsilon(1e-14));

    // E[B_T] = 0 and E[B_T^2] = T to 1e-12
    std::vector<double> b(201), b2(201);
    for (int j = 0; j <= 200; ++j) {
        b[j] = l.brownian_at(200, j);
        b2[j] = b[j] * b[j];
    }
    CHECK(std::fabs(terminal_expectation(l, b)) <= 1e-12);
    CHECK(std::fabs(terminal_expectation(l, b2) - 1.0) <= 1e-12);

    // one-step increments: mean 0, variance dt under the (1/2,1/2) weights
    const double dt = l.dt();
    const double up = l.brownian_at(1, 1), dn = l.brownian_at(1, 0);
    CHECK(0.5 * (up + dn) == 0.0);
    CHECK(0.5 * (up * up + dn * dn) == doctest::Approx(dt).epsilon(1e-15));
}

TEST_CASE("pathwise cumulant moments match closed forms") {
    // deterministic increment d at every node: S_T = N*d exactly
    const Lattice l = build_lattice(TimeGrid(1.0, 16));
    NodeField<double> incr(16, 0.25);
    const CumulantMoments m = pathwise_cumulant_moments(l, incr);
    CHECK(m.mean == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(m.second == doctest::Approx(16.0).epsilon(1e-13));

    // increment = 1 only at the two level-1 nodes: S_T = 1 a.s.
    NodeField<double> one_step(16, 0.0);
    one_step(1, 0) = one_step(1, 1) = 1.0;
    const CumulantMoments m1 = pathwise_cumulant_moments(l, one_step);
    CHECK(m1.mean == doctest::Approx(1.0));
    CHECK(m1.second == doctest::Approx(1.0));

    // increment 1{path passed node (1,1)}: E[S]=1/2, E[S^2]=1/2
    NodeField<double> bern(16, 0.0);
    bern(1, 1) = 1.0;
    const CumulantMoments mb = pathwise_cumulant_moments(l, bern);
    CHECK(mb.mean == doctest::Approx(0.5));
    CHECK(mb.second == doctest::Approx(0.5));

    const std::vector<double> curve = expected_cumulant_curve(l, bern);
    CHECK(curve[0] == 0.0);
    CHECK(curve[1] == 0.0); // accrues while stepping away from level 1
    CHECK(curve[2] == doctest::Approx(0.5));
    CHECK(curve[16] == doctest::Approx(0.5));
}

TEST_CASE("validate_problem") {
    SUBCASE("ordered barriers pass") {
        ProblemSpec spec = basic_spec(1.0, 8);
        spec.barriers.lower = BarrierSide::of([](double, double) { return -1.0; });
        spec.barriers.upper = BarrierSide::of([](double, double) { return 1.0; });
        const ValidationReport report = validate_problem(spec);
        CHECK(report.ok());
        CHECK(!report.has_warnings);

        // idempotent and side-effect free
        const ValidationReport again = validate_problem(spec);
        CHECK(again.to_string() == report.to_string());
    }
    SUBCASE("crossed barriers rejected at node (0,0)") {
        ProblemSpec spec = basic_spec(1.0, 8);
        spec.barriers.lower = BarrierSide::of([](double, double) { return 1.0; });
        spec.barriers.upper = BarrierSide::of([](double, double) { return 0.0; });
        try {
            validate_problem(spec);
            FAIL("expected HardViolation");
        } catch (const HardViolation& e) {
            CHECK(std::string(e.what()).find("(0,0)") != std::string::npos);
            CHECK(!e.report.ok());
        }
    }
    SUBCASE("terminal outside the barriers rejected") {
        ProblemSpec spec = basic_spec(1.0, 4);
        spec.barriers.lower = BarrierSide::of([](double, double) { return 0.5; });
        spec.terminal.xi = [](double) { return 0.0; }; // below L(T)
        CHECK_THROWS_AS(validate_problem(spec), HardViolation);
    }
    SUBCASE("quadratic driver triggers a growth warning, not rejection") {
        ProblemSpec spec = basic_spec(1.0, 4);
        spec.driver.growth_k = 1.0;
        spec.driver.f = [](double, double y, double) { return y * y; };
        const ValidationReport report = validate_problem(spec);
        CHECK(report.ok());
        CHECK(report.has_warnings);
        CHECK(report.to_string().find("warn") != std::string::npos);
    }
}

TEST_CASE("accepted problems have ordered barriers at every node") {
    // quantified over the full lattice after validation
    ProblemSpec spec = basic_spec(1.0, 32);
    spec.barriers.lower = BarrierSide::of([](double, double x) { return std::fmin(0.0, x); });
    spec.barriers.upper =
        BarrierSide::of([](double, double x) { return std::fmax(0.0, x) + 1.0; });
    validate_problem(spec);
    const LatticeProblem problem = discretize(spec);
    for (int k = 0; k <= 32; ++k)
        for (int j = 0; j <= k; ++j)
            CHECK(problem.lower(k, j).value <= problem.upper(k, j).value);
}

TEST_CASE("Mokobodzki witness") {
    SUBCASE("constant process between constant barriers") {
        ProblemSpec spec = basic_spec(1.0, 6);
        spec.barriers.lower = BarrierSide::of([](double, double) { return -1.0; });
        spec.barriers.upper = BarrierSide::of([](double, double) { return 1.0; });
        MokobodzkiWitness w{NodeField<double>(6, 0.0), NodeField<double>(6, 0.0),
                            NodeField<double>(6, 0.0), NodeField<double>(6, 0.0),
                            NodeField<double>(6, 0.0), NodeField<double>(6, 0.0)};
        CHECK(check_mokobodzki_witness(spec, w));

        // X0 = 2 exceeds the upper barrier
        MokobodzkiWitness bad = w;
        for (auto& v : bad.x0.raw()) v = 2.0;
        CHECK(!check_mokobodzki_witness(spec, bad));
    }
    SUBCASE("forward-clamp witness on state-dependent barriers") {
        ProblemSpec spec = basic_spec(1.0, 12);
        // lower barrier pokes above zero on the up side, so the clamp is
        // genuinely nontrivial
        spec.barriers.lower =
            BarrierSide::of([](double, double x) { return std::fmin(0.0, x) + 0.2; });
        spec.barriers.upper =
            BarrierSide::of([](double, double x) { return std::fmax(0.0, x) + 1.0; });
        spec.terminal.xi = [](double x) { return std::fmin(0.0, x) + 0.5; };
        const LatticeProblem problem = discretize(spec);
        const MokobodzkiWitness w =
            forward_clamp_witness(problem.lattice, problem.lower, problem.upper);
        CHECK(check_mokobodzki_witness(spec, w));
        bool nontrivial = false;
        for (double v : w.a_up.raw()) nontrivial = nontrivial || v > 0;
        CHECK(nontrivial);
    }
    SUBCASE("dimension mismatch") {
        ProblemSpec spec = basic_spec(1.0, 6);
        MokobodzkiWitness w{NodeField<double>(4, 0.0), NodeField<double>(4, 0.0),
                            NodeField<double>(4, 0.0), NodeField<double>(4, 0.0),
                            NodeField<double>(4, 0.0), NodeField<double>(4, 0.0)};
        CHECK_THROWS_AS(check_mokobodzki_witness(spec, w), DimensionMismatch);
    }
}
