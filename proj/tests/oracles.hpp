#pragma once

// Test-side oracles, independent of the library's solver path: a textbook
// American-option dynamic program, brute-force inf-convolution, and an exact
// max-plus recursion for pathwise sums. Shared fixture problems live here
// too so the unit and acceptance suites agree on the instances.

#include "rbsde/grid.hpp"
#include "rbsde/model.hpp"

#include <functional>
#include <vector>

namespace oracles {

/// Textbook backward dynamic program for an American claim on the binomial
/// lattice: V_N = payoff, V_k = max(payoff, continuation / (1 + r*dt)).
/// Own loops and storage; shares only the lattice geometry with the library.
rbsde::NodeField<double> american_dp(const rbsde::Lattice& lattice,
                                     const std::function<double(double t, double x)>& payoff,
                                     double rate);

/// Brute-force 1-D inf-convolution min_u f(u) + p|x - u| over a dense grid
/// on [lo, hi], refined around the best grid point by golden-section search.
double brute_force_inf_convolve_1d(const std::function<double(double)>& f, double p, double x,
                                   double lo, double hi, double step);

/// Exact max over lattice paths of sum_k term(k, j_k) via the max-plus
/// backward recursion (cross-check for the sampling-based path scan).
double max_path_sum_dp(const rbsde::Lattice& lattice, const rbsde::NodeField<double>& term);

/// American put desk instance: obstacle pos(1 - exp(x - t/2)), driver
/// -0.05*y, no upper barrier, terminal equals the obstacle at T.
rbsde::ProblemSpec american_put_spec(double horizon, int steps);

/// Double-barrier toy with both compensators active: L = -0.25, U = 0.3,
/// terminal clamp(x) into [-0.2, 0.3], driver 2*y (the backward
/// amplification pushes the solution into both barriers).
rbsde::ProblemSpec double_barrier_toy_spec(int steps);

} // namespace oracles
