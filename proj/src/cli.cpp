#include "rbsde/cli.hpp"

#include "rbsde/reports.hpp"

#include <json.hpp>

#include <cmath>
#include <iostream>

namespace rbsde {

namespace {

using nlohmann::json;

ScheduleRow row_from_bounds(int p, double m, double n, double y0, const BoundsRecord& b,
                            double gap) {
    ScheduleRow r;
    r.p = p;
    r.m = m;
    r.n = n;
    r.y0 = y0;
    r.e_supY2 = b.e_sup_y2;
    r.e_intZ2 = b.e_int_z2;
    r.e_AT2 = b.e_a_t2;
    r.e_KT2 = b.e_k_t2;
    r.gap_vs_oracle = gap;
    return r;
}

struct DiagnoseOutcome {
    json report;
    bool ok = true;

    void record(const std::string& name, bool pass, const json& detail) {
        report[name] = json{{"pass", pass}, {"detail", detail}};
        ok = ok && pass;
    }
};

int run_diagnose(const LoadedRun& run, const OutputPlan& out, bool quiet) {
    const LatticeProblem problem = discretize(run.spec);
    DiagnoseOutcome outcome;

    const SolutionQuadruple oracle = solve_reflected_oracle(problem);
    const BoundsRecord oracle_bounds = apriori_bounds(problem.lattice, oracle);

    // Skorohod residuals over the canonical admissible family
    const std::vector<double> thetas{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<SkorohodRow> sk_rows;
    {
        double worst = 0.0;
        const auto pairs = sample_test_pairs(problem, oracle, thetas);
        for (const auto& pair : pairs) {
            const SkorohodResidual r = skorohod_residual(problem.lattice, oracle, pair);
            sk_rows.push_back({pair.theta, r.r_a, r.r_k});
            worst = std::max({worst, r.r_a, r.r_k});
        }
        outcome.record("skorohod_oracle", worst <= 1e-12, json{{"worst_residual", worst}});
    }

    // penalized complementarity defects shrink as m grows
    std::vector<ScheduleRow> rows;
    {
        const double n_top = run.plan.schedule.n.back();
        std::vector<SolutionQuadruple> sweep;
        std::vector<double> defects;
        bool decreasing = true;
        double prev = 0.0;
        for (std::size_t i = 0; i < run.plan.schedule.m.size(); ++i) {
            const double m = run.plan.schedule.m[i];
            const SolutionQuadruple q = solve_penalized(problem, PenalizedDriver{m, n_top});
            const SkorohodResidual defect = penalized_complementarity_defect(problem, q);
            const double d = defect.r_a + defect.r_k;
            defects.push_back(d);
            if (i > 0 && d > prev + 1e-15) decreasing = false;
            prev = d;
            const BoundsRecord b = apriori_bounds(problem.lattice, q);
            rows.push_back(row_from_bounds(static_cast<int>(std::lround(m)), m, n_top, q.y(0, 0),
                                           b, std::fabs(q.y(0, 0) - oracle.y(0, 0))));
            sweep.push_back(q);
        }
        outcome.record("penalized_defect_decreasing", decreasing, json{{"defects", defects}});

        const ConditionReport cond = monotone_limit_check(problem.lattice, sweep);
        json entries = json::array();
        for (const auto& e : cond.entries)
            entries.push_back(json{{"id", e.id},
                                   {"status", e.status == CheckStatus::fail ? "fail"
                                              : e.status == CheckStatus::auto_pass
                                                  ? "auto-pass"
                                                  : "pass"},
                                   {"worst", e.worst},
                                   {"detail", e.detail}});
        outcome.record("monotone_limit_conditions", cond.all_ok(), entries);

        // a-priori envelope over the sweep
        double max_sum = 0.0;
        for (const auto& r : rows) max_sum = std::max(max_sum, r.e_supY2 + r.e_intZ2 + r.e_AT2 + r.e_KT2);
        const double baseline = oracle_bounds.sum();
        outcome.record("apriori_envelope", max_sum <= 10.0 * baseline || baseline == 0.0,
                       json{{"max_cell_sum", max_sum}, {"oracle_sum", baseline}});

        // comparison sandwich around the middle cell, built from the
        // oracle's compensator increments
        const std::size_t mid = run.plan.schedule.m.size() / 2;
        const double m_mid = run.plan.schedule.m[mid];
        const SolutionQuadruple q_mid = sweep[mid];
        const SolutionQuadruple y_plus =
            solve_bsde_with_increments(problem, oracle.da, PenalizedDriver{m_mid, 0.0});
        NodeField<double> neg_dk(problem.lattice.steps(), 0.0);
        for (int k = 0; k < problem.lattice.steps(); ++k)
            for (int j = 0; j <= k; ++j) neg_dk(k, j) = -oracle.dk(k, j);
        const SolutionQuadruple y_minus =
            solve_bsde_with_increments(problem, neg_dk, PenalizedDriver{0.0, n_top});
        OrderingCertificate cert;
        cert.terminal_ok = cert.driver_ok = true;
        const ViolationReport lower_side = comparison_check(y_minus.y, q_mid.y, cert);
        const ViolationReport upper_side = comparison_check(q_mid.y, y_plus.y, cert);
        outcome.record("comparison_sandwich",
                       lower_side.violations == 0 && upper_side.violations == 0,
                       json{{"below_violations", lower_side.violations},
                            {"above_violations", upper_side.violations}});
    }

    // driver-shift equivalence: zero-driver re-solve in de-shifted
    // coordinates reproduces the solution
    {
        const DriverShiftedProblem shifted = driver_shift_transform(problem, oracle);
        const NodeField<double> w = resolve_shifted_zero_driver(problem, shifted);
        double worst = 0.0;
        for (int k = 0; k <= problem.lattice.steps(); ++k)
            for (int j = 0; j <= k; ++j)
                worst = std::max(worst, std::fabs(w(k, j) - oracle.y(k, j)));
        outcome.record("shift_equivalence", worst <= 1e-10, json{{"max_node_gap", worst}});
    }

    if (!problem.has_upper()) {
        // minimality of the oracle among supersolutions dominating L
        const auto candidates = generate_supersolution_candidates(problem, 20, 0xCAFE);
        const MinimalityReport rep = minimality_check(problem, oracle, candidates);
        outcome.record("minimality", rep.violations == 0,
                       json{{"candidates", rep.candidates_checked},
                            {"violations", rep.violations}});
    } else {
        // K-shift replay: feeding the penalized K back reproduces the
        // lower-barrier problem in de-shifted coordinates
        const double m_top = run.plan.schedule.m.back();
        const double n_top = run.plan.schedule.n.back();
        const SolutionQuadruple q = solve_penalized(problem, PenalizedDriver{m_top, n_top});
        const KShiftedProblem shifted = k_shift_transform(problem, q.dk);
        LatticeProblem lower_only = problem;
        lower_only.upper = NodeField<Bound>(problem.lattice.steps());
        const SolutionQuadruple v =
            solve_bsde_with_increments(lower_only, shifted.sink, PenalizedDriver{m_top, 0.0});
        double worst = 0.0;
        for (int k = 0; k <= problem.lattice.steps(); ++k)
            for (int j = 0; j <= k; ++j)
                worst = std::max(worst, std::fabs(v.y(k, j) - q.y(k, j)));
        outcome.record("k_shift_replay", worst <= 1e-10, json{{"max_node_gap", worst}});
    }

    rows.insert(rows.begin(), row_from_bounds(0, 0.0, 0.0, oracle.y(0, 0), oracle_bounds, 0.0));
    write_reports(rows, sk_rows, out.dir, out.csv, out.json, run.config_hash,
                  "diagnostics.json", outcome.report.dump(2) + "\n");
    if (!quiet) {
        for (const auto& [name, entry] : outcome.report.items())
            std::cout << (entry["pass"].get<bool>() ? "[PASS] " : "[FAIL] ") << name << "\n";
    }
    return outcome.ok ? 0 : 4;
}

} // namespace

int dispatch(const std::string& command, const CliOptions& options) {
    LoadedRun run{ProblemSpec{TimeGrid(1.0, 1), {}, {}, {}, {}}, {}, "", "", "", "", ""};
    try {
        run = load_config(options.config_path);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    if (options.out_dir) run.plan.output.dir = *options.out_dir;
    if (options.seed) run.plan.mc.seed = *options.seed;
    const OutputPlan& out = run.plan.output;

    ValidationReport validation;
    try {
        validation = validate_problem(run.spec);
    } catch (const HardViolation& e) {
        std::cerr << e.report.to_string();
        std::cerr << "validation failed\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (command == "validate") {
            if (!options.quiet) std::cout << validation.to_string();
            return 0;
        }

        const LatticeProblem problem = discretize(run.spec);
        const PenalizationSchedule& sched = run.plan.schedule;

        if (command == "oracle") {
            const SolutionQuadruple q = solve_reflected_oracle(problem);
            const BoundsRecord b = apriori_bounds(problem.lattice, q);
            const std::vector<ScheduleRow> rows{
                row_from_bounds(0, 0.0, 0.0, q.y(0, 0), b, 0.0)};
            write_reports(rows, {}, out.dir, out.csv, out.json, run.config_hash);
            if (!options.quiet)
                std::cout << "oracle y0 = " << q.y(0, 0) << " (E[A_T] = " << b.e_a_t
                          << ", E[K_T] = " << b.e_k_t << ")\n";
            return 0;
        }

        if (command == "solve") {
            const double m = sched.m.back();
            const double n = sched.n.back();
            const int p = sched.tie_p_to_m ? static_cast<int>(std::lround(m))
                                           : sched.p.back();
            const SolutionQuadruple q = solve_penalized(problem, PenalizedDriver{m, n});
            const SolutionQuadruple oracle = solve_reflected_oracle(problem);
            const BoundsRecord b = apriori_bounds(problem.lattice, q);
            const std::vector<ScheduleRow> rows{row_from_bounds(
                p, m, n, q.y(0, 0), b, std::fabs(q.y(0, 0) - oracle.y(0, 0)))};
            write_reports(rows, {}, out.dir, out.csv, out.json, run.config_hash);
            if (!options.quiet)
                std::cout << "penalized y0 = " << q.y(0, 0) << " at (m=" << m << ", n=" << n
                          << "), gap vs oracle = " << rows[0].gap_vs_oracle << "\n";
            return 0;
        }

        if (command == "schedule") {
            const ConvergenceReport report = run_schedule(problem, sched);
            const DoubleLimitReport dl = double_limit_study(problem, sched);
            json study{{"oracle_y0", report.oracle_y0},
                       {"fitted_decay_slope", report.fitted_decay_slope},
                       {"envelope_max_sum", report.envelope_max_sum},
                       {"oracle_sum", report.oracle_bounds.sum()},
                       {"double_limit_final_gap", dl.final_gap}};
            json rows_dl = json::array();
            for (const auto& r : dl.rows)
                rows_dl.push_back(json{{"m", r.m},
                                       {"last_n_gap", r.last_n_gap},
                                       {"extrapolated_gap", r.extrapolated_gap},
                                       {"hybrid_vs_oracle_gap", r.hybrid_vs_oracle_gap}});
            study["double_limit_rows"] = rows_dl;
            write_reports(to_rows(report), {}, out.dir, out.csv, out.json, run.config_hash,
                          "study.json", study.dump(2) + "\n");
            if (!options.quiet)
                std::cout << "schedule: " << report.cells.size()
                          << " cells, oracle y0 = " << report.oracle_y0
                          << ", decay slope = " << report.fitted_decay_slope
                          << ", mono violations (m,n) = (" << report.total_mono_viol_m << ","
                          << report.total_mono_viol_n << ")\n";
            return 0;
        }

        if (command == "mc") {
            const PathBundle bundle = simulate_paths(run.spec.grid, run.plan.mc.paths,
                                                     run.plan.mc.seed, run.plan.mc.increments);
            const McProblem mc_problem{run.spec.driver, run.spec.barriers, run.spec.terminal};
            const RegressionBasis basis{run.plan.mc.basis_degree, false};
            const bool barriers =
                run.spec.barriers.lower.present() || run.spec.barriers.upper.present();
            const McSolution sol =
                barriers ? solve_penalized_mc(bundle, mc_problem, sched.m.back(),
                                              sched.n.back(), basis)
                         : solve_bsde_mc(bundle, mc_problem, basis);
            const SolutionQuadruple oracle = solve_reflected_oracle(problem);
            ScheduleRow r;
            r.p = 0;
            r.m = barriers ? sched.m.back() : 0.0;
            r.n = barriers ? sched.n.back() : 0.0;
            r.y0 = sol.y0;
            r.e_supY2 = sol.e_sup_y2.mean;
            r.e_intZ2 = sol.e_int_z2.mean;
            r.e_AT2 = sol.e_a_t2.mean;
            r.e_KT2 = sol.e_k_t2.mean;
            r.gap_vs_oracle = std::fabs(sol.y0 - oracle.y(0, 0));
            write_reports({r}, {}, out.dir, out.csv, out.json, run.config_hash);
            if (!options.quiet)
                std::cout << "mc y0 = " << sol.y0 << " +- " << sol.y0_stderr
                          << " (lattice oracle " << oracle.y(0, 0) << ")\n";
            return 0;
        }

        if (command == "diagnose") return run_diagnose(run, out, options.quiet);

        std::cerr << "unknown command '" << command << "'\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 1;
    } catch (const InadmissiblePair& e) {
        std::cerr << "diagnostic violation: " << e.what() << "\n";
        return 4;
    } catch (const NotASupersolution& e) {
        std::cerr << "diagnostic violation: " << e.what() << "\n";
        return 4;
    } catch (const OrderingViolated& e) {
        std::cerr << "diagnostic violation: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace rbsde
