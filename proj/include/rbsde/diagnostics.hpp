#pragma once

#include "rbsde/lattice_engine.hpp"

#include <cstdint>
#include <vector>

namespace rbsde {

struct InadmissiblePair : Error {
    using Error::Error;
};

struct OrderingViolated : Error {
    using Error::Error;
};

struct NotASupersolution : Error {
    using Error::Error;
};

/// Admissible intermediate barriers for the generalized Skorohod condition:
/// L <= L* <= Y <= U* <= U node-wise. theta records the interpolation
/// parameter when the pair comes from the canonical family.
struct SkorohodTestPair {
    NodeField<double> l_star;
    NodeField<double> u_star;
    double theta = 0.0;
};

struct SkorohodResidual {
    double r_a = 0.0;
    double r_k = 0.0;
};

struct PathSampling {
    int exhaustive_limit = 12; // enumerate all 2^N paths up to here
    int n_samples = 10000;
    std::uint64_t seed = 0x51D;
};

/// Pathwise complementarity residuals: r_a is the max over lattice paths of
/// sum_k (Y_k - L*_k) * dA_k, r_k the analog for (U*_k - Y_k) * dK_k. The
/// pair must be admissible relative to q (L* <= Y <= U*), which makes every
/// term and hence both residuals nonnegative.
SkorohodResidual skorohod_residual(const Lattice& lattice, const SolutionQuadruple& q,
                                   const SkorohodTestPair& pair,
                                   const PathSampling& sampling = {});

/// Canonical admissible family L* = L + theta*(Y - L), U* = U - theta*(U - Y)
/// for each theta; an absent barrier side contributes the finite probe
/// Y -+ (1 - theta). Requires L <= Y <= U everywhere (OrderingViolated).
std::vector<SkorohodTestPair> sample_test_pairs(const LatticeProblem& problem,
                                                const SolutionQuadruple& q,
                                                const std::vector<double>& thetas);

/// Complementarity defect of a penalized quadruple measured against the raw
/// barriers: max over paths of |sum (Y - L) dA| and |sum (U - Y) dK|. The
/// penalized Y crosses the barriers by construction, so the admissible-pair
/// residual above does not apply; this signed defect is what shrinks as the
/// penalty coefficients grow.
SkorohodResidual penalized_complementarity_defect(const LatticeProblem& problem,
                                                  const SolutionQuadruple& q,
                                                  const PathSampling& sampling = {});

/// The four a-priori bound statistics. E[int Z^2 dt], E[A_T^2], E[K_T^2] are
/// exact tree sweeps; E[sup Y^2] is estimated from sampled paths.
struct BoundsRecord {
    double e_sup_y2 = 0.0;
    double e_sup_y2_stderr = 0.0;
    double e_int_z2 = 0.0;
    double e_a_t2 = 0.0;
    double e_k_t2 = 0.0;
    double e_a_t = 0.0;
    double e_k_t = 0.0;

    double sum() const { return e_sup_y2 + e_int_z2 + e_a_t2 + e_k_t2; }
};

BoundsRecord apriori_bounds(const Lattice& lattice, const SolutionQuadruple& q,
                            const PathSampling& sampling = {});

/// Probed certificate that problem A is dominated by problem B
/// (terminal node-wise, driver on a probe grid).
struct OrderingCertificate {
    bool terminal_ok = false;
    bool driver_ok = false;
    double worst_terminal_gap = 0.0; // max(xi_A - xi_B)
    double worst_driver_gap = 0.0;   // max(f_A - f_B) over probes
    bool ok() const { return terminal_ok && driver_ok; }
};

OrderingCertificate probe_problem_ordering(const LatticeProblem& a, const LatticeProblem& b,
                                           int probes_per_axis = 11);

struct ViolationReport {
    long violations = 0;
    double worst_gap = 0.0;
    int worst_k = -1, worst_j = -1;
    OrderingCertificate certificate;
};

/// Counts nodes where Y_A exceeds Y_B by more than tol (zero expected when
/// the certificate holds and the dt*Lip step gate is respected).
ViolationReport comparison_check(const NodeField<double>& y_a, const NodeField<double>& y_b,
                                 OrderingCertificate certificate, double tol = 1e-10);

/// A discrete g-supersolution candidate: Y = c + dt*f(t, Y, Z) + dA with
/// dA >= 0 at every node, dominating the lower barrier.
struct SupersolutionCandidate {
    NodeField<double> y;
    NodeField<double> z;
    NodeField<double> da;
};

/// Verifies each candidate's own decomposition identity (NotASupersolution
/// beyond tol), its domination of L, and then minimality of the oracle:
/// oracle Y <= candidate Y node-wise.
struct MinimalityReport {
    long candidates_checked = 0;
    long violations = 0;
    double worst_gap = 0.0; // max(oracle - candidate)
};

MinimalityReport minimality_check(const LatticeProblem& problem,
                                  const SolutionQuadruple& oracle,
                                  const std::vector<SupersolutionCandidate>& candidates,
                                  double tol = 1e-10);

/// Random supersolutions dominating L: per node the increment is
/// max(extra, phi(L) - c, 0) with random nonnegative extra, where
/// phi(y) = y - dt*f(t,y,z); the floor term is exactly what keeps the
/// solved value at or above the barrier.
std::vector<SupersolutionCandidate> generate_supersolution_candidates(
    const LatticeProblem& problem, int count, std::uint64_t seed);

} // namespace rbsde
