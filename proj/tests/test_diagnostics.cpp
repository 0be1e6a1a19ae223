#include "rbsde/diagnostics.hpp"

#include "rbsde/stats.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rbsde;

TEST_CASE("Skorohod residuals on the clamped oracle vanish for the whole theta family") {
    const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(60));
    const SolutionQuadruple oracle = solve_reflected_oracle(problem);
    const auto pairs = sample_test_pairs(problem, oracle, {0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(pairs.size() == 5);
    for (const auto& pair : pairs) {
        const SkorohodResidual r = skorohod_residual(problem.lattice, oracle, pair);
        CHECK(r.r_a <= 1e-12);
        CHECK(r.r_k <= 1e-12);
    }
    // theta endpoints are taken bitwise
    for (int k = 0; k <= 60; ++k)
        for (int j = 0; j <= k; ++j) {
            CHECK(pairs[0].l_star(k, j) == problem.lower(k, j).value);
            CHECK(pairs[4].l_star(k, j) == oracle.y(k, j));
            CHECK(pairs[4].u_star(k, j) == oracle.y(k, j));
        }
}

TEST_CASE("zero compensator means zero residual for every admissible pair") {
    ProblemSpec spec{TimeGrid(1.0, 10), {}, {}, {}, {}};
    spec.driver.growth_k = 1.0;
    spec.driver.f = [](double, double, double) { return 0.0; };
    spec.terminal.xi = [](double x) { return x; };
    const LatticeProblem problem = discretize(spec);
    const SolutionQuadruple q = solve_reflected_oracle(problem); // no barriers: A = K = 0
    for (const auto& pair : sample_test_pairs(problem, q, {0.0, 0.5, 1.0})) {
        const SkorohodResidual r = skorohod_residual(problem.lattice, q, pair);
        CHECK(r.r_a == 0.0);
        CHECK(r.r_k == 0.0);
    }
}

TEST_CASE("inadmissible pairs are rejected") {
    const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(20));
    const SolutionQuadruple oracle = solve_reflected_oracle(problem);
    SkorohodTestPair bad{NodeField<double>(20, 0.0), NodeField<double>(20, 0.0), 0.0};
    for (int k = 0; k <= 20; ++k)
        for (int j = 0; j <= k; ++j) {
            bad.l_star(k, j) = oracle.y(k, j) + 0.1; // L* above Y
            bad.u_star(k, j) = oracle.y(k, j) + 1.0;
        }
    CHECK_THROWS_AS(skorohod_residual(problem.lattice, oracle, bad), InadmissiblePair);
}

TEST_CASE("penalized runs violate the barrier ordering and are caught") {
    const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(40));
    const SolutionQuadruple q = solve_penalized(problem, PenalizedDriver{8.0, 8.0});
    CHECK_THROWS_AS(sample_test_pairs(problem, q, {0.0}), OrderingViolated);
}

TEST_CASE("penalized complementarity defect shrinks in m") {
    const LatticeProblem problem = discretize(oracles::american_put_spec(1.0, 60));
    double prev = 1e300;
    std::vector<std::pair<double, double>> curve;
    for (double m : {4.0, 16.0, 64.0, 256.0, 1024.0}) {
        const SolutionQuadruple q = solve_penalized(problem, PenalizedDriver{m, 0.0});
        const SkorohodResidual d = penalized_complementarity_defect(problem, q);
        CHECK(d.r_k == 0.0); // no upper barrier
        CHECK(d.r_a < prev);
        prev = d.r_a;
        curve.emplace_back(m, d.r_a);
    }
    // decays like C/m
    const double slope = fit_loglog_slope(curve);
    CHECK(slope < -0.5);
}

TEST_CASE("pathwise scan agrees with the exact max-plus recursion") {
    const Lattice lattice = build_lattice(TimeGrid(1.0, 10));
    NodeField<double> term(10, 0.0);
    std::mt19937_64 rng(17);
    for (int k = 0; k < 10; ++k)
        for (int j = 0; j <= k; ++j)
            term(k, j) = static_cast<double>(rng() >> 40) * 0x1.0p-24;
    const double exhaustive = max_abs_path_sum(lattice, term, 12);
    const double dp = oracles::max_path_sum_dp(lattice, term);
    CHECK(exhaustive == doctest::Approx(dp).epsilon(1e-14));
}

TEST_CASE("a-priori bound statistics") {
    SUBCASE("constant terminal: record is (1, 0, 0, 0)") {
        ProblemSpec spec{TimeGrid(1.0, 12), {}, {}, {}, {}};
        spec.driver.growth_k = 1.0;
        spec.driver.f = [](double, double, double) { return 0.0; };
        spec.terminal.xi = [](double) { return 1.0; };
        const LatticeProblem problem = discretize(spec);
        const SolutionQuadruple q = solve_reflected_oracle(problem);
        const BoundsRecord rec = apriori_bounds(problem.lattice, q);
        CHECK(rec.e_sup_y2 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rec.e_sup_y2_stderr == 0.0);
        CHECK(rec.e_int_z2 == 0.0);
        CHECK(rec.e_a_t2 == 0.0);
        CHECK(rec.e_k_t2 == 0.0);
    }
    SUBCASE("xi = x: E[int Z^2 dt] = T exactly, E[sup Y^2] >= 1") {
        ProblemSpec spec{TimeGrid(1.0, 12), {}, {}, {}, {}};
        spec.driver.growth_k = 1.0;
        spec.driver.f = [](double, double, double) { return 0.0; };
        spec.terminal.xi = [](double x) { return x; };
        const LatticeProblem problem = discretize(spec);
        const SolutionQuadruple q = solve_reflected_oracle(problem);
        const BoundsRecord rec = apriori_bounds(problem.lattice, q);
        CHECK(rec.e_int_z2 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rec.e_sup_y2 >= 1.0 - 1e-12);
    }
    SUBCASE("exact A-moment sweeps match the sampled statistic") {
        const LatticeProblem problem = discretize(oracles::double_barrier_toy_spec(30));
        const SolutionQuadruple q = solve_penalized(problem, PenalizedDriver{64.0, 64.0});
        const CumulantMoments exact = pathwise_cumulant_moments(problem.lattice, q.da);
        // sample the same functional; 3000 paths keeps the test fast
        std::vector<double> samples;
        for (int s = 0; s < 3000; ++s) {
            std::mt19937_64 rng(stream_seed(777, static_cast<std::uint64_t>(s)));
            double sum = 0.0;
            int j = 0;
            for (int k = 0; k < 30; ++k) {
                sum += q.da(k, j);
                j += static_cast<int>(rng() >> 63);
            }
            samples.push_back(sum);
        }
        const SampleStats stats = summarize(samples);
        CHECK(std::fabs(stats.mean - exact.mean) <= 5.0 * stats.stderr_mean + 1e-12);
    }
}

TEST_CASE("comparison check") {
    const LatticeProblem a = discretize(oracles::double_barrier_toy_spec(30));
    const SolutionQuadruple qa = solve_reflected_oracle(a);
    SUBCASE("identical problems: zero violations") {
        const OrderingCertificate cert = probe_problem_ordering(a, a);
        CHECK(cert.ok());
        const ViolationReport rep = comparison_check(qa.y, qa.y, cert);
        CHECK(rep.violations == 0);
    }
    SUBCASE("shifted terminal dominates node-wise") {
        ProblemSpec spec = oracles::double_barrier_toy_spec(30);
        const auto base_xi = spec.terminal.xi;
        spec.terminal.xi = [base_xi](double x) { return base_xi(x) + 1.0; };
        spec.barriers.upper = BarrierSide::of([](double, double) { return 1.3; });
        const LatticeProblem b = discretize(spec);
        const OrderingCertificate cert = probe_problem_ordering(a, b);
        CHECK(cert.terminal_ok);
        CHECK(cert.driver_ok);
        const SolutionQuadruple qb = solve_reflected_oracle(b);
        const ViolationReport rep = comparison_check(qa.y, qb.y, cert);
        CHECK(rep.violations == 0);
        // and strictly: Y_B >= Y_A everywhere
        for (int k = 0; k <= 30; ++k)
            for (int j = 0; j <= k; ++j) CHECK(qb.y(k, j) >= qa.y(k, j) - 1e-12);
    }
    SUBCASE("violations are located") {
        NodeField<double> lo(5, 0.0), hi(5, 0.0);
        hi(3, 2) = -1.0; // lo > hi there
        const ViolationReport rep = comparison_check(lo, hi, {});
        CHECK(rep.violations == 1);
        CHECK(rep.worst_k == 3);
        CHECK(rep.worst_j == 2);
    }
}

TEST_CASE("minimality of the clamped oracle among supersolutions") {
    const LatticeProblem problem = discretize(oracles::american_put_spec(1.0, 40));
    const SolutionQuadruple oracle = solve_reflected_oracle(problem);

    SUBCASE("floor-only candidate ties the oracle") {
        const auto candidates = generate_supersolution_candidates(problem, 1, 5);
        const MinimalityReport rep = minimality_check(problem, oracle, candidates);
        CHECK(rep.candidates_checked == 1);
        CHECK(rep.violations == 0);
        double worst = 0.0;
        for (int k = 0; k <= 40; ++k)
            for (int j = 0; j <= k; ++j)
                worst = std::max(worst, std::fabs(candidates[0].y(k, j) - oracle.y(k, j)));
        CHECK(worst <= 1e-10);
    }
    SUBCASE("inflating A at the root raises the candidate above the oracle") {
        auto candidates = generate_supersolution_candidates(problem, 1, 5);
        SupersolutionCandidate cand = candidates[0];
        // add 0.1 to the root increment and re-solve that node (children fixed)
        const double c = 0.5 * (cand.y(1, 1) + cand.y(1, 0));
        const double z = cand.z(0, 0);
        const double delta = cand.da(0, 0) + 0.1;
        const LatticeNode node = problem.lattice.node(0, 0);
        const StepSolution step = detail::solve_scalar_step(
            c + delta, problem.lattice.dt(),
            [&](double yy) { return problem.driver(node, yy, z); }, 1.0);
        REQUIRE(step.converged);
        cand.y(0, 0) = step.y;
        cand.da(0, 0) =
            step.y - c - problem.lattice.dt() * problem.driver(node, step.y, z);
        const MinimalityReport rep = minimality_check(problem, oracle, {cand});
        CHECK(rep.violations == 0);
        CHECK(cand.y(0, 0) >= oracle.y(0, 0) + 0.05);
    }
    SUBCASE("fifty randomized supersolutions dominate the oracle") {
        const auto candidates = generate_supersolution_candidates(problem, 50, 0xFEED);
        const MinimalityReport rep = minimality_check(problem, oracle, candidates);
        CHECK(rep.candidates_checked == 50);
        CHECK(rep.violations == 0);
    }
    SUBCASE("corrupted decomposition is rejected") {
        auto candidates = generate_supersolution_candidates(problem, 1, 5);
        candidates[0].da(10, 3) += 1e-6;
        CHECK_THROWS_AS(minimality_check(problem, oracle, candidates), NotASupersolution);
    }
}
