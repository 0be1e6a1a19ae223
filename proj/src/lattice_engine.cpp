#include "rbsde/lattice_engine.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace rbsde {

namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// Bracket half-width for the step at a node, following the linear-growth
// bound of the driver plus the penalty terms that can be active there.
double bracket_pad(const LatticeProblem& problem, PenalizedDriver pd, int k, int j,
                   double c, double z) {
    const double dt = problem.lattice.dt();
    double pad = problem.growth_k * (1.0 + std::fabs(c) + std::fabs(z)) + 1.0;
    if (!problem.lower.empty() && problem.lower(k, j).present)
        pad += pd.m * std::fabs(problem.lower(k, j).value - c);
    if (!problem.upper.empty() && problem.upper(k, j).present)
        pad += pd.n * std::fabs(c - problem.upper(k, j).value);
    return dt * pad;
}

[[noreturn]] void throw_diverged(int k, int j) {
    std::ostringstream os;
    os << "semi-implicit step failed to converge at node (" << k << "," << j << ")";
    throw StepDiverged(os.str());
}

struct LevelOutputs {
    double* y;
    double* z;
    double* da;
    double* dk;
};

// Generic backward sweep. node_step(k, j, c, z) must return the node value
// and fill the increment outputs; it runs on independent nodes of one level.
template <typename NodeStep>
void backward_sweep(const LatticeProblem& problem, NodeField<double>& y,
                    NodeField<double>& z, Exec exec, NodeStep&& node_step) {
    const int n = problem.lattice.steps();
    const double sdt = problem.lattice.sqrt_dt();
    for (int j = 0; j <= n; ++j) y(n, j) = problem.terminal[static_cast<std::size_t>(j)];

    std::atomic<bool> diverged{false};
    std::atomic<int> div_k{0}, div_j{0};
    for (int k = n - 1; k >= 0; --k) {
        parallel_for(exec, k + 1, [&](int j) {
            const double up = y(k + 1, j + 1);
            const double dn = y(k + 1, j);
            const double c = 0.5 * (up + dn);
            const double zz = (up - dn) / (2.0 * sdt);
            z(k, j) = zz;
            if (!node_step(k, j, c, zz, y(k, j))) {
                diverged.store(true, std::memory_order_relaxed);
                div_k.store(k, std::memory_order_relaxed);
                div_j.store(j, std::memory_order_relaxed);
            }
        });
        if (diverged.load()) throw_diverged(div_k.load(), div_j.load());
    }
}

} // namespace

double penalized_driver_value(const LatticeProblem& problem, const LatticeNode& node,
                              PenalizedDriver pd, double y, double z) {
    double g = problem.driver(node, y, z);
    if (!problem.lower.empty() && problem.lower(node.k, node.j).present)
        g += pd.m * positive_part(problem.lower(node.k, node.j).value - y);
    if (!problem.upper.empty() && problem.upper(node.k, node.j).present)
        g -= pd.n * positive_part(y - problem.upper(node.k, node.j).value);
    return g;
}

BsdeSolution solve_bsde(const LatticeProblem& problem, Exec exec) {
    const int n = problem.lattice.steps();
    BsdeSolution sol{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0)};
    const double dt = problem.lattice.dt();
    backward_sweep(problem, sol.y, sol.z, exec,
                   [&](int k, int j, double c, double z, double& out) {
                       const LatticeNode node = problem.lattice.node(k, j);
                       const auto step = detail::solve_scalar_step(
                           c, dt, [&](double yy) { return problem.driver(node, yy, z); },
                           bracket_pad(problem, {}, k, j, c, z));
                       out = step.y;
                       return step.converged;
                   });
    return sol;
}

SolutionQuadruple solve_penalized(const LatticeProblem& problem, PenalizedDriver pd,
                                  Exec exec) {
    const int n = problem.lattice.steps();
    SolutionQuadruple q{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0),
                        NodeField<double>(n, 0.0), NodeField<double>(n, 0.0)};
    const double dt = problem.lattice.dt();
    backward_sweep(problem, q.y, q.z, exec,
                   [&](int k, int j, double c, double z, double& out) {
                       const LatticeNode node = problem.lattice.node(k, j);
                       const auto step = detail::solve_scalar_step(
                           c, dt,
                           [&](double yy) { return penalized_driver_value(problem, node, pd, yy, z); },
                           bracket_pad(problem, pd, k, j, c, z));
                       out = step.y;
                       if (!problem.lower.empty() && problem.lower(k, j).present)
                           q.da(k, j) = dt * pd.m * positive_part(problem.lower(k, j).value - step.y);
                       if (!problem.upper.empty() && problem.upper(k, j).present)
                           q.dk(k, j) = dt * pd.n * positive_part(step.y - problem.upper(k, j).value);
                       return step.converged;
                   });
    return q;
}

SolutionQuadruple solve_reflected_oracle(const LatticeProblem& problem, Exec exec) {
    const int n = problem.lattice.steps();
    SolutionQuadruple q{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0),
                        NodeField<double>(n, 0.0), NodeField<double>(n, 0.0)};
    const double dt = problem.lattice.dt();
    backward_sweep(problem, q.y, q.z, exec,
                   [&](int k, int j, double c, double z, double& out) {
                       const LatticeNode node = problem.lattice.node(k, j);
                       const auto step = detail::solve_scalar_step(
                           c, dt, [&](double yy) { return problem.driver(node, yy, z); },
                           bracket_pad(problem, {}, k, j, c, z));
                       double y = step.y;
                       // Clamp assigns the tabulated barrier value, so
                       // Y - L (resp. U - Y) is exactly zero where the
                       // corresponding increment is positive.
                       if (!problem.lower.empty() && problem.lower(k, j).present &&
                           y < problem.lower(k, j).value)
                           y = problem.lower(k, j).value;
                       if (!problem.upper.empty() && problem.upper(k, j).present &&
                           y > problem.upper(k, j).value)
                           y = problem.upper(k, j).value;
                       q.da(k, j) = positive_part(y - step.y);
                       q.dk(k, j) = positive_part(step.y - y);
                       out = y;
                       return step.converged;
                   });
    return q;
}

SolutionQuadruple solve_upper_reflected_penalized(const LatticeProblem& problem, double m,
                                                  Exec exec) {
    if (m < 0.0 || !std::isfinite(m)) throw InvalidPenalty("m must be finite nonnegative");
    const int n = problem.lattice.steps();
    SolutionQuadruple q{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0),
                        NodeField<double>(n, 0.0), NodeField<double>(n, 0.0)};
    const double dt = problem.lattice.dt();
    const PenalizedDriver lower_only{m, 0.0};
    backward_sweep(problem, q.y, q.z, exec,
                   [&](int k, int j, double c, double z, double& out) {
                       const LatticeNode node = problem.lattice.node(k, j);
                       const auto g = [&](double yy) {
                           return penalized_driver_value(problem, node, lower_only, yy, z);
                       };
                       const auto step = detail::solve_scalar_step(
                           c, dt, g, bracket_pad(problem, lower_only, k, j, c, z));
                       double y = step.y;
                       double dk = 0.0;
                       if (!problem.upper.empty() && problem.upper(k, j).present &&
                           y > problem.upper(k, j).value) {
                           // In the n->infinity limit the penalty pins Y to U
                           // and absorbs the excess of the step map at U.
                           y = problem.upper(k, j).value;
                           dk = c + dt * g(y) - y;
                       }
                       if (!problem.lower.empty() && problem.lower(k, j).present)
                           q.da(k, j) = dt * m * positive_part(problem.lower(k, j).value - y);
                       q.dk(k, j) = dk;
                       out = y;
                       return step.converged;
                   });
    return q;
}

SolutionQuadruple solve_bsde_with_increments(const LatticeProblem& problem,
                                             const NodeField<double>& source,
                                             PenalizedDriver pd, Exec exec) {
    if (source.steps() != problem.lattice.steps())
        throw DimensionMismatch("source field does not match the lattice");
    const int n = problem.lattice.steps();
    SolutionQuadruple q{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0),
                        NodeField<double>(n, 0.0), NodeField<double>(n, 0.0)};
    const double dt = problem.lattice.dt();
    backward_sweep(problem, q.y, q.z, exec,
                   [&](int k, int j, double c, double z, double& out) {
                       const LatticeNode node = problem.lattice.node(k, j);
                       const double shifted_c = c + source(k, j);
                       const auto step = detail::solve_scalar_step(
                           shifted_c, dt,
                           [&](double yy) { return penalized_driver_value(problem, node, pd, yy, z); },
                           bracket_pad(problem, pd, k, j, shifted_c, z));
                       out = step.y;
                       if (!problem.lower.empty() && problem.lower(k, j).present)
                           q.da(k, j) = dt * pd.m * positive_part(problem.lower(k, j).value - step.y);
                       if (!problem.upper.empty() && problem.upper(k, j).present)
                           q.dk(k, j) = dt * pd.n * positive_part(step.y - problem.upper(k, j).value);
                       return step.converged;
                   });
    return q;
}

DriverShiftedProblem driver_shift_transform(const LatticeProblem& problem,
                                            const SolutionQuadruple& solved) {
    const int n = problem.lattice.steps();
    DriverShiftedProblem out{NodeField<double>(n, 0.0)};
    for (int k = 0; k < n; ++k)
        for (int j = 0; j <= k; ++j)
            out.frozen_driver(k, j) =
                problem.driver(problem.lattice.node(k, j), solved.y(k, j), solved.z(k, j));
    return out;
}

NodeField<double> resolve_shifted_zero_driver(const LatticeProblem& problem,
                                              const DriverShiftedProblem& shifted,
                                              Exec exec) {
    const int n = problem.lattice.steps();
    const double dt = problem.lattice.dt();
    NodeField<double> w(n, 0.0), zunused(n, 0.0);
    backward_sweep(problem, w, zunused, exec,
                   [&](int k, int j, double c, double, double& out) {
                       double y = c + dt * shifted.frozen_driver(k, j);
                       if (!problem.lower.empty() && problem.lower(k, j).present &&
                           y < problem.lower(k, j).value)
                           y = problem.lower(k, j).value;
                       if (!problem.upper.empty() && problem.upper(k, j).present &&
                           y > problem.upper(k, j).value)
                           y = problem.upper(k, j).value;
                       out = y;
                       return true;
                   });
    return w;
}

std::vector<double> running_integral_along_path(const LatticeProblem& problem,
                                                const NodeField<double>& rate,
                                                const std::vector<int>& up_moves) {
    const int n = problem.lattice.steps();
    const double dt = problem.lattice.dt();
    std::vector<double> f(static_cast<std::size_t>(n) + 1, 0.0);
    int j = 0;
    for (int k = 0; k < n; ++k) {
        f[static_cast<std::size_t>(k) + 1] = f[static_cast<std::size_t>(k)] + dt * rate(k, j);
        j += up_moves[static_cast<std::size_t>(k)] ? 1 : 0;
    }
    return f;
}

KShiftedProblem k_shift_transform(const LatticeProblem& problem,
                                  const NodeField<double>& k_increments) {
    if (k_increments.steps() != problem.lattice.steps())
        throw DimensionMismatch("K increments do not match the lattice");
    const int n = problem.lattice.steps();
    KShiftedProblem out{k_increments, NodeField<double>(n, 0.0)};
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double d = k_increments(k, j);
            if (d < -1e-15)
                throw NotNondecreasing("K increment negative at node (" + std::to_string(k) +
                                       "," + std::to_string(j) + ")");
            out.sink(k, j) = -d;
        }
    }
    return out;
}

} // namespace rbsde
