#pragma once

#include "rbsde/model.hpp"
#include "rbsde/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbsde {

struct StepDiverged : Error {
    using Error::Error;
};

struct InvalidPenalty : Error {
    using Error::Error;
};

struct NotNondecreasing : Error {
    using Error::Error;
};

/// Penalty coefficients of the doubly-penalized driver
///   g(t,y,z) = f(t,y,z) + m*(L - y)^+ - n*(y - U)^+.
/// The base driver and the barriers live in the LatticeProblem.
struct PenalizedDriver {
    double m = 0.0; // lower-barrier coefficient
    double n = 0.0; // upper-barrier coefficient

    PenalizedDriver() = default;
    PenalizedDriver(double m_, double n_) : m(m_), n(n_) {
        if (m < 0.0 || n < 0.0 || !std::isfinite(m) || !std::isfinite(n))
            throw InvalidPenalty("penalty coefficients must be finite and nonnegative");
    }
};

struct BsdeSolution {
    NodeField<double> y;
    NodeField<double> z;
};

struct StepSolution {
    double y = 0.0;
    bool converged = false;
    int iterations = 0;
};

namespace detail {

/// Solves the scalar semi-implicit step equation y = c + dt*g(y) with Newton
/// iteration inside a bisection bracket grown geometrically from
/// [c - pad, c + pad]. phi(y) = y - c - dt*g(y) is strictly increasing for
/// dt*Lip_y(f) <= 1/2; penalty terms only steepen it, so arbitrarily large
/// coefficients are safe. Convergence: |phi| <= 1e-13*scale, or the bracket
/// pinched to a few ulps (the representable residual floor grows with the
/// penalty slope).
template <typename G>
StepSolution solve_scalar_step(double c, double dt, G&& g, double pad) {
    StepSolution out;
    const auto phi = [&](double y) { return y - c - dt * g(y); };

    if (pad < 1e-8) pad = 1e-8;
    double lo = c - pad, hi = c + pad;
    double plo = phi(lo), phi_hi = phi(hi);
    for (int expand = 0; plo > 0.0 && expand < 64; ++expand) {
        pad *= 2.0;
        lo = c - pad;
        plo = phi(lo);
    }
    for (int expand = 0; phi_hi < 0.0 && expand < 64; ++expand) {
        pad *= 2.0;
        hi = c + pad;
        phi_hi = phi(hi);
    }
    if (plo > 0.0 || phi_hi < 0.0) return out; // not bracketed: diverged

    double y = c;
    if (y <= lo || y >= hi) y = 0.5 * (lo + hi);
    for (int it = 1; it <= 200; ++it) {
        out.iterations = it;
        const double p = phi(y);
        const double scale = std::max({1.0, std::fabs(y), std::fabs(c)});
        if (std::fabs(p) <= 1e-13 * scale) {
            out.y = y;
            out.converged = true;
            return out;
        }
        if (p > 0.0) hi = y; else lo = y;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
            out.y = y; // root pinched to machine precision
            out.converged = true;
            return out;
        }
        const double h = 1e-7 * std::max(1.0, std::fabs(y));
        const double d = (phi(y + h) - phi(y - h)) / (2.0 * h);
        double next;
        if (d > 1e-12) {
            next = y - p / d;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        } else {
            next = 0.5 * (lo + hi);
        }
        y = next;
    }
    out.y = y;
    return out;
}

} // namespace detail

/// Classical BSDE by backward induction with the semi-implicit step
/// (implicit in y, explicit in z). Barriers in the problem are ignored.
BsdeSolution solve_bsde(const LatticeProblem& problem, Exec exec = Exec::parallel);

/// Doubly-penalized BSDE. The increments are da = dt*m*(L - Y)^+ and
/// dk = dt*n*(Y - U)^+ evaluated at the solved node value.
SolutionQuadruple solve_penalized(const LatticeProblem& problem, PenalizedDriver pd,
                                  Exec exec = Exec::parallel);

/// Clamped doubly-reflected oracle: the unreflected step value y~ is
/// projected onto [L, U]; da = (Y - y~)^+, dk = (y~ - Y)^+. Discrete
/// complementarity da*(Y - L) = dk*(U - Y) = 0 holds bitwise.
SolutionQuadruple solve_reflected_oracle(const LatticeProblem& problem,
                                         Exec exec = Exec::parallel);

/// Intermediate object of the iterated limit (n to infinity at fixed m):
/// upper barrier enforced by clamping, lower barrier by the m-penalty.
/// dk is the excess absorbed by the clamp, da = dt*m*(L - Y)^+.
SolutionQuadruple solve_upper_reflected_penalized(const LatticeProblem& problem, double m,
                                                  Exec exec = Exec::parallel);

/// Penalized BSDE with an extra per-node source term added to the step:
/// y = c + dt*g(y) + source(k, j). Used for the comparison sandwich, for
/// supersolution candidates and for the K-shift replay.
SolutionQuadruple solve_bsde_with_increments(const LatticeProblem& problem,
                                             const NodeField<double>& source,
                                             PenalizedDriver pd = {},
                                             Exec exec = Exec::parallel);

/// Frozen-driver (zero-driver) transform: freezes fhat(k,j) = f(t, Y, Z)
/// along a solved quadruple. The transformed data xi_hat, L_hat and the
/// process Y_hat all add the running integral F_t = sum dt*fhat along the
/// path; F is common to both children of a node, so it factors out of the
/// clamp and the re-solve can run in de-shifted node coordinates.
struct DriverShiftedProblem {
    NodeField<double> frozen_driver; // fhat at each node, level N zero
};

DriverShiftedProblem driver_shift_transform(const LatticeProblem& problem,
                                            const SolutionQuadruple& solved);

/// Re-solves the shifted problem with zero driver and clamping, returned in
/// de-shifted coordinates: W(k,j) = Y_hat - F along any path through (k,j).
/// Equivalence holds iff W matches the original solution Y node-wise.
NodeField<double> resolve_shifted_zero_driver(const LatticeProblem& problem,
                                              const DriverShiftedProblem& shifted,
                                              Exec exec = Exec::parallel);

/// Cumulative running integral sum_{r<k} dt*fhat(r, j_r) along the path with
/// the given up-moves; for tests exercising the pathwise transformed data.
std::vector<double> running_integral_along_path(const LatticeProblem& problem,
                                                const NodeField<double>& rate,
                                                const std::vector<int>& up_moves);

/// Driver-shift transform with a nondecreasing process K given by its
/// per-node increments (K_0 = 0): driver f^K(t,y,z) = f(t, y + K_t, z),
/// lower barrier L^K = L - K, terminal xi - K_T. The cumulative K is
/// path-dependent on a recombining lattice, but it is shared by both
/// children of a node, so the shifted problem is solved exactly in
/// de-shifted coordinates V = Ybar + K as the base problem with the sink
/// term -dK; the shifted solution along a path is Ybar = V - K.
struct KShiftedProblem {
    NodeField<double> k_increments;
    NodeField<double> sink; // -dK, fed to solve_bsde_with_increments
};

KShiftedProblem k_shift_transform(const LatticeProblem& problem,
                                  const NodeField<double>& k_increments);

/// g(t,y,z) at a node for the penalized driver; exposed for tests.
double penalized_driver_value(const LatticeProblem& problem, const LatticeNode& node,
                              PenalizedDriver pd, double y, double z);

} // namespace rbsde
