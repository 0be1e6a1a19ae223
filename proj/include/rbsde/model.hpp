#pragma once

#include "rbsde/grid.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rbsde {

struct DimensionMismatch : Error {
    using Error::Error;
};

/// Driver f(t, y, z) with its declared linear-growth constant K.
struct Driver {
    std::function<double(double t, double y, double z)> f;
    double growth_k = 1.0;
};

/// One side of the barrier pair; absent() means unbounded everywhere.
class BarrierSide {
public:
    static BarrierSide unbounded() { return BarrierSide{}; }
    static BarrierSide of(std::function<double(double t, double x)> fn) {
        BarrierSide b;
        b.fn_ = std::move(fn);
        return b;
    }

    bool present() const { return static_cast<bool>(fn_); }
    double value(double t, double x) const { return fn_(t, x); }

private:
    std::function<double(double, double)> fn_;
};

struct BarrierPair {
    BarrierSide lower = BarrierSide::unbounded();
    BarrierSide upper = BarrierSide::unbounded();
};

struct TerminalCondition {
    std::function<double(double x)> xi;
};

/// Assumption-4 witness: a process X0 between the barriers, decomposing on
/// every edge into increasing parts plus the martingale term Z0*dB. The
/// increasing-part increments live on edges (a_up/a_dn, k_up/k_dn indexed by
/// the source node) so that child-dependent pushes stay adapted.
struct MokobodzkiWitness {
    NodeField<double> x0;
    NodeField<double> z0;
    NodeField<double> a_up, a_dn; // increments of A0 on the up/down edge
    NodeField<double> k_up, k_dn; // increments of K0 on the up/down edge
};

struct ProblemSpec {
    TimeGrid grid;
    Driver driver;
    BarrierPair barriers;
    TerminalCondition terminal;
    std::optional<MokobodzkiWitness> witness;
};

/// Problem instantiated on a lattice: barrier/terminal node tables plus a
/// node-aware driver (transforms produce drivers that depend on the node).
struct LatticeProblem {
    Lattice lattice;
    std::function<double(const LatticeNode&, double y, double z)> driver;
    double growth_k = 1.0;
    NodeField<Bound> lower, upper;
    std::vector<double> terminal; // level-N values, index j

    bool has_lower() const;
    bool has_upper() const;
};

LatticeProblem discretize(const ProblemSpec& spec);

/// Discrete solution processes. A and K are stored through their per-node
/// increments da, dk (the amount accrued while stepping away from a node);
/// cumulative values along a path are the running sums of these.
struct SolutionQuadruple {
    NodeField<double> y;
    NodeField<double> z;  // level N unused (zero)
    NodeField<double> da; // >= 0 everywhere
    NodeField<double> dk; // >= 0 everywhere
};

enum class CheckStatus { pass, warn, fail, auto_pass };

struct AssumptionCheck {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    bool hard_ok = true;
    bool has_warnings = false;

    bool ok() const { return hard_ok; }
    std::string to_string() const;
};

struct HardViolation : Error {
    HardViolation(const std::string& what, ValidationReport report)
        : Error(what), report(std::move(report)) {}
    ValidationReport report;
};

/// Checks the standing assumptions on the lattice. Hard failures (barrier
/// crossing, terminal outside the barriers, non-finite data) throw
/// HardViolation carrying the full report; growth-bound violations of the
/// driver are recorded as warnings. Pure: no side effects on spec.
ValidationReport validate_problem(const ProblemSpec& spec);

/// True iff the witness invariants hold within tol: L <= X0 <= U, edge
/// increments nonnegative, and the edge decomposition
/// X0(child) = X0(node) + dA0 - dK0 + Z0 * (+-sqrt(dt)) at every edge.
bool check_mokobodzki_witness(const ProblemSpec& spec, const MokobodzkiWitness& witness,
                              double tol = 1e-10);

/// Heuristic witness: X0 = clamp of 0 between the barriers node-wise, Z0 = 0,
/// edge increments taken from the positive/negative parts of the X0 steps.
MokobodzkiWitness forward_clamp_witness(const Lattice& lattice,
                                        const NodeField<Bound>& lower,
                                        const NodeField<Bound>& upper);

} // namespace rbsde
