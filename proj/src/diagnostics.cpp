#include "rbsde/diagnostics.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace rbsde {

namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

std::string node_tag(int k, int j) {
    std::ostringstream os;
    os << "(" << k << "," << j << ")";
    return os.str();
}

} // namespace

SkorohodResidual skorohod_residual(const Lattice& lattice, const SolutionQuadruple& q,
                                   const SkorohodTestPair& pair,
                                   const PathSampling& sampling) {
    const int n = lattice.steps();
    if (pair.l_star.steps() != n || pair.u_star.steps() != n || q.y.steps() != n)
        throw DimensionMismatch("test pair does not match the lattice");
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            if (pair.l_star(k, j) > q.y(k, j) + 1e-12 ||
                q.y(k, j) > pair.u_star(k, j) + 1e-12)
                throw InadmissiblePair("pair ordering violated at node " + node_tag(k, j));
        }
    }
    NodeField<double> term_a(n, 0.0), term_k(n, 0.0);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j <= k; ++j) {
            term_a(k, j) = (q.y(k, j) - pair.l_star(k, j)) * q.da(k, j);
            term_k(k, j) = (pair.u_star(k, j) - q.y(k, j)) * q.dk(k, j);
        }
    }
    SkorohodResidual r;
    r.r_a = max_abs_path_sum(lattice, term_a, sampling.exhaustive_limit, sampling.n_samples,
                             sampling.seed);
    r.r_k = max_abs_path_sum(lattice, term_k, sampling.exhaustive_limit, sampling.n_samples,
                             sampling.seed);
    return r;
}

std::vector<SkorohodTestPair> sample_test_pairs(const LatticeProblem& problem,
                                                const SolutionQuadruple& q,
                                                const std::vector<double>& thetas) {
    const int n = problem.lattice.steps();
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            if (!problem.lower.empty() && problem.lower(k, j).present &&
                q.y(k, j) < problem.lower(k, j).value - 1e-12)
                throw OrderingViolated("Y below L at node " + node_tag(k, j));
            if (!problem.upper.empty() && problem.upper(k, j).present &&
                q.y(k, j) > problem.upper(k, j).value + 1e-12)
                throw OrderingViolated("Y above U at node " + node_tag(k, j));
        }
    }
    std::vector<SkorohodTestPair> pairs;
    pairs.reserve(thetas.size());
    for (double theta : thetas) {
        SkorohodTestPair pair{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0), theta};
        for (int k = 0; k <= n; ++k) {
            for (int j = 0; j <= k; ++j) {
                const double y = q.y(k, j);
                // endpoints taken bitwise so the exact-complementarity cases
                // produce exactly zero residual terms
                if (!problem.lower.empty() && problem.lower(k, j).present) {
                    const double l = problem.lower(k, j).value;
                    pair.l_star(k, j) = theta == 0.0 ? l : (theta == 1.0 ? y : l + theta * (y - l));
                } else {
                    pair.l_star(k, j) = y - (1.0 - theta);
                }
                if (!problem.upper.empty() && problem.upper(k, j).present) {
                    const double u = problem.upper(k, j).value;
                    pair.u_star(k, j) = theta == 0.0 ? u : (theta == 1.0 ? y : u - theta * (u - y));
                } else {
                    pair.u_star(k, j) = y + (1.0 - theta);
                }
            }
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

SkorohodResidual penalized_complementarity_defect(const LatticeProblem& problem,
                                                  const SolutionQuadruple& q,
                                                  const PathSampling& sampling) {
    const int n = problem.lattice.steps();
    NodeField<double> term_a(n, 0.0), term_k(n, 0.0);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j <= k; ++j) {
            if (!problem.lower.empty() && problem.lower(k, j).present)
                term_a(k, j) = (q.y(k, j) - problem.lower(k, j).value) * q.da(k, j);
            if (!problem.upper.empty() && problem.upper(k, j).present)
                term_k(k, j) = (problem.upper(k, j).value - q.y(k, j)) * q.dk(k, j);
        }
    }
    SkorohodResidual r;
    r.r_a = max_abs_path_sum(problem.lattice, term_a, sampling.exhaustive_limit,
                             sampling.n_samples, sampling.seed);
    r.r_k = max_abs_path_sum(problem.lattice, term_k, sampling.exhaustive_limit,
                             sampling.n_samples, sampling.seed);
    return r;
}

BoundsRecord apriori_bounds(const Lattice& lattice, const SolutionQuadruple& q,
                            const PathSampling& sampling) {
    const int n = lattice.steps();
    BoundsRecord rec;
    const NodeField<double> prob = node_probabilities(lattice);
    const double dt = lattice.dt();
    double int_z2 = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j <= k; ++j)
            int_z2 += prob(k, j) * q.z(k, j) * q.z(k, j) * dt;
    rec.e_int_z2 = int_z2;

    const CumulantMoments a = pathwise_cumulant_moments(lattice, q.da);
    const CumulantMoments k2 = pathwise_cumulant_moments(lattice, q.dk);
    rec.e_a_t = a.mean;
    rec.e_a_t2 = a.second;
    rec.e_k_t = k2.mean;
    rec.e_k_t2 = k2.second;

    const SampleStats sup = sampled_sup_square(lattice, q.y, sampling.n_samples, sampling.seed);
    rec.e_sup_y2 = sup.mean;
    rec.e_sup_y2_stderr = sup.stderr_mean;
    return rec;
}

OrderingCertificate probe_problem_ordering(const LatticeProblem& a, const LatticeProblem& b,
                                           int probes_per_axis) {
    OrderingCertificate cert;
    cert.terminal_ok = a.terminal.size() == b.terminal.size();
    if (cert.terminal_ok) {
        for (std::size_t j = 0; j < a.terminal.size(); ++j) {
            const double gap = a.terminal[j] - b.terminal[j];
            if (gap > cert.worst_terminal_gap) cert.worst_terminal_gap = gap;
        }
        cert.terminal_ok = cert.worst_terminal_gap <= 1e-12;
    }
    cert.driver_ok = true;
    const int n = a.lattice.steps();
    const int kk = std::max(1, n / 4);
    for (int k = 0; k < n; k += kk) {
        for (int j = 0; j <= k; ++j) {
            const LatticeNode node = a.lattice.node(k, j);
            for (int iy = 0; iy < probes_per_axis; ++iy) {
                const double y = -5.0 + 10.0 * iy / (probes_per_axis - 1);
                for (int iz = 0; iz < probes_per_axis; ++iz) {
                    const double z = -5.0 + 10.0 * iz / (probes_per_axis - 1);
                    const double gap = a.driver(node, y, z) - b.driver(node, y, z);
                    if (gap > cert.worst_driver_gap) cert.worst_driver_gap = gap;
                }
            }
        }
    }
    cert.driver_ok = cert.worst_driver_gap <= 1e-12;
    return cert;
}

ViolationReport comparison_check(const NodeField<double>& y_a, const NodeField<double>& y_b,
                                 OrderingCertificate certificate, double tol) {
    if (y_a.steps() != y_b.steps())
        throw DimensionMismatch("comparison runs on different lattices");
    ViolationReport rep;
    rep.certificate = certificate;
    const int n = y_a.steps();
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double gap = y_a(k, j) - y_b(k, j);
            if (gap > tol) {
                ++rep.violations;
                if (gap > rep.worst_gap) {
                    rep.worst_gap = gap;
                    rep.worst_k = k;
                    rep.worst_j = j;
                }
            }
        }
    }
    return rep;
}

MinimalityReport minimality_check(const LatticeProblem& problem,
                                  const SolutionQuadruple& oracle,
                                  const std::vector<SupersolutionCandidate>& candidates,
                                  double tol) {
    const int n = problem.lattice.steps();
    const double dt = problem.lattice.dt();
    const double sdt = problem.lattice.sqrt_dt();
    MinimalityReport rep;
    for (const auto& cand : candidates) {
        if (cand.y.steps() != n)
            throw DimensionMismatch("candidate does not match the lattice");
        // terminal must match and the decomposition identity must hold
        for (int j = 0; j <= n; ++j) {
            if (std::fabs(cand.y(n, j) - problem.terminal[static_cast<std::size_t>(j)]) > tol)
                throw NotASupersolution("candidate terminal differs at " + node_tag(n, j));
        }
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j <= k; ++j) {
                if (cand.da(k, j) < -1e-15)
                    throw NotASupersolution("negative increment at " + node_tag(k, j));
                const double c = 0.5 * (cand.y(k + 1, j + 1) + cand.y(k + 1, j));
                const double z = (cand.y(k + 1, j + 1) - cand.y(k + 1, j)) / (2.0 * sdt);
                if (std::fabs(cand.z(k, j) - z) > tol)
                    throw NotASupersolution("Z inconsistent with children at " + node_tag(k, j));
                const LatticeNode node = problem.lattice.node(k, j);
                const double resid =
                    cand.y(k, j) - c - dt * problem.driver(node, cand.y(k, j), z) - cand.da(k, j);
                if (std::fabs(resid) > tol)
                    throw NotASupersolution("decomposition identity fails by " +
                                            std::to_string(resid) + " at " + node_tag(k, j));
                if (!problem.lower.empty() && problem.lower(k, j).present &&
                    cand.y(k, j) < problem.lower(k, j).value - tol)
                    throw NotASupersolution("candidate does not dominate L at " + node_tag(k, j));
            }
        }
        ++rep.candidates_checked;
        for (int k = 0; k <= n; ++k) {
            for (int j = 0; j <= k; ++j) {
                const double gap = oracle.y(k, j) - cand.y(k, j);
                if (gap > tol) {
                    ++rep.violations;
                    if (gap > rep.worst_gap) rep.worst_gap = gap;
                }
            }
        }
    }
    return rep;
}

std::vector<SupersolutionCandidate> generate_supersolution_candidates(
    const LatticeProblem& problem, int count, std::uint64_t seed) {
    const int n = problem.lattice.steps();
    const double dt = problem.lattice.dt();
    const double sdt = problem.lattice.sqrt_dt();
    std::vector<SupersolutionCandidate> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int c_idx = 0; c_idx < count; ++c_idx) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(c_idx)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        SupersolutionCandidate cand{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0),
                                    NodeField<double>(n, 0.0)};
        for (int j = 0; j <= n; ++j)
            cand.y(n, j) = problem.terminal[static_cast<std::size_t>(j)];
        for (int k = n - 1; k >= 0; --k) {
            for (int j = 0; j <= k; ++j) {
                const double up = cand.y(k + 1, j + 1);
                const double dn = cand.y(k + 1, j);
                const double c = 0.5 * (up + dn);
                const double z = (up - dn) / (2.0 * sdt);
                cand.z(k, j) = z;
                const LatticeNode node = problem.lattice.node(k, j);
                double extra = 0.0;
                if (c_idx > 0 && unif(rng) < 0.3) extra = 0.5 * dt * unif(rng);
                double floor_term = 0.0;
                if (!problem.lower.empty() && problem.lower(k, j).present) {
                    const double l = problem.lower(k, j).value;
                    floor_term = l - dt * problem.driver(node, l, z) - c;
                }
                const double delta = std::max({extra, floor_term, 0.0});
                const auto step = detail::solve_scalar_step(
                    c + delta, dt, [&](double yy) { return problem.driver(node, yy, z); },
                    dt * (problem.growth_k * (1.0 + std::fabs(c) + std::fabs(z)) + 1.0) + delta);
                if (!step.converged)
                    throw StepDiverged("candidate construction failed at " + node_tag(k, j));
                double y = step.y;
                // keep the identity exact: da is whatever the solved value says
                cand.da(k, j) = y - c - dt * problem.driver(node, y, z);
                if (cand.da(k, j) < 0.0 && cand.da(k, j) > -1e-13) cand.da(k, j) = 0.0;
                cand.y(k, j) = y;
            }
        }
        out.push_back(std::move(cand));
    }
    return out;
}

} // namespace rbsde
