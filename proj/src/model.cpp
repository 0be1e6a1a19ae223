#include "rbsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rbsde {

namespace {

NodeField<Bound> tabulate_barrier(const Lattice& lattice, const BarrierSide& side) {
    const int n = lattice.steps();
    NodeField<Bound> table(n);
    if (!side.present()) return table;
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            const LatticeNode node = lattice.node(k, j);
            table(k, j) = Bound{side.value(node.t, node.x), true};
        }
    }
    return table;
}

std::string node_str(const Lattice& lattice, int k, int j) {
    std::ostringstream os;
    os << "(" << k << "," << j << ") t=" << lattice.node(k, j).t
       << " x=" << lattice.node(k, j).x;
    return os.str();
}

const char* status_str(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::warn: return "warn";
        case CheckStatus::fail: return "FAIL";
        case CheckStatus::auto_pass: return "auto-pass";
    }
    return "?";
}

} // namespace

bool LatticeProblem::has_lower() const {
    return !lower.empty() && lower(0, 0).present;
}

bool LatticeProblem::has_upper() const {
    return !upper.empty() && upper(0, 0).present;
}

LatticeProblem discretize(const ProblemSpec& spec) {
    LatticeProblem p{Lattice(spec.grid), {}, spec.driver.growth_k, {}, {}, {}};
    const auto f = spec.driver.f;
    p.driver = [f](const LatticeNode& node, double y, double z) {
        return f(node.t, y, z);
    };
    p.lower = tabulate_barrier(p.lattice, spec.barriers.lower);
    p.upper = tabulate_barrier(p.lattice, spec.barriers.upper);
    const int n = p.lattice.steps();
    p.terminal.resize(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j)
        p.terminal[static_cast<std::size_t>(j)] = spec.terminal.xi(p.lattice.brownian_at(n, j));
    return p;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& c : checks)
        os << "[" << status_str(c.status) << "] " << c.name << ": " << c.detail << "\n";
    return os.str();
}

ValidationReport validate_problem(const ProblemSpec& spec) {
    ValidationReport report;
    const Lattice lattice(spec.grid);
    const int n = lattice.steps();

    const NodeField<Bound> lower = tabulate_barrier(lattice, spec.barriers.lower);
    const NodeField<Bound> upper = tabulate_barrier(lattice, spec.barriers.upper);

    // Assumption 1: terminal condition finite (square-integrability is
    // automatic on a finite lattice).
    {
        AssumptionCheck c{"assumption 1 (terminal condition)", CheckStatus::auto_pass,
                          "finite lattice: L2 automatic"};
        for (int j = 0; j <= n; ++j) {
            if (!std::isfinite(spec.terminal.xi(lattice.brownian_at(n, j)))) {
                c.status = CheckStatus::fail;
                c.detail = "non-finite terminal value at node " + node_str(lattice, n, j);
                break;
            }
        }
        report.checks.push_back(c);
        if (c.status == CheckStatus::fail) report.hard_ok = false;
    }

    // Assumption 2: linear growth of the driver, probed on a deterministic
    // (t, y, z) grid of >= 1000 points. Violations warn, they do not reject.
    {
        AssumptionCheck c{"assumption 2 (driver growth)", CheckStatus::pass, ""};
        static const double probe_vals[] = {0.0,  0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0,
                                            -2.0, 4.0,  -4.0,  8.0, -8.0, 10.0, -10.0};
        const double K = spec.driver.growth_k;
        double worst_excess = 0.0;
        std::string worst;
        int probed = 0;
        for (int it = 0; it <= 4; ++it) {
            const double t = spec.grid.horizon() * it / 4.0;
            for (double y : probe_vals) {
                for (double z : probe_vals) {
                    ++probed;
                    const double fv = spec.driver.f(t, y, z);
                    const double bound = K * (1.0 + std::fabs(y) + std::fabs(z));
                    if (!std::isfinite(fv) || std::fabs(fv) > bound + 1e-12) {
                        const double excess = std::isfinite(fv)
                                                  ? std::fabs(fv) - bound
                                                  : std::numeric_limits<double>::infinity();
                        if (excess > worst_excess) {
                            worst_excess = excess;
                            std::ostringstream os;
                            os << "|f(" << t << "," << y << "," << z << ")| = " << std::fabs(fv)
                               << " > K(1+|y|+|z|) = " << bound;
                            worst = os.str();
                        }
                    }
                }
            }
        }
        if (!worst.empty()) {
            c.status = CheckStatus::warn;
            c.detail = "growth bound violated on probe grid: " + worst;
            report.has_warnings = true;
        } else {
            c.detail = "bound holds on " + std::to_string(probed) + " probe points";
        }
        report.checks.push_back(c);
    }

    // Assumption 3: barrier ordering and terminal between the barriers.
    {
        AssumptionCheck c{"assumption 3 (barriers)", CheckStatus::pass, "ordered at every node"};
        double worst_gap = 0.0;
        std::string worst;
        for (int k = 0; k <= n && worst.empty(); ++k) {
            for (int j = 0; j <= k; ++j) {
                const Bound lo = lower(k, j);
                const Bound up = upper(k, j);
                if (lo.present && !std::isfinite(lo.value)) {
                    worst = "non-finite lower barrier at " + node_str(lattice, k, j);
                    break;
                }
                if (up.present && !std::isfinite(up.value)) {
                    worst = "non-finite upper barrier at " + node_str(lattice, k, j);
                    break;
                }
                if (lo.present && up.present && lo.value > up.value) {
                    const double gap = lo.value - up.value;
                    if (gap > worst_gap) {
                        worst_gap = gap;
                        worst = "L > U by " + std::to_string(gap) + " at " + node_str(lattice, k, j);
                    }
                    break;
                }
            }
        }
        if (worst.empty()) {
            for (int j = 0; j <= n; ++j) {
                const double xi = spec.terminal.xi(lattice.brownian_at(n, j));
                const Bound lo = lower(n, j);
                const Bound up = upper(n, j);
                if (lo.present && lo.value > xi) {
                    worst = "L(T) > xi at " + node_str(lattice, n, j);
                    break;
                }
                if (up.present && xi > up.value) {
                    worst = "xi > U(T) at " + node_str(lattice, n, j);
                    break;
                }
            }
        }
        if (!worst.empty()) {
            c.status = CheckStatus::fail;
            c.detail = worst;
            report.hard_ok = false;
        }
        report.checks.push_back(c);

        AssumptionCheck l2{"assumption 3 (barrier square-integrability)", CheckStatus::auto_pass,
                           "finite lattice: E[ess sup (L+)^2] finite automatically"};
        report.checks.push_back(l2);
    }

    // Assumption 4: Mokobodzki-type witness. Verify the supplied one, or
    // fall back to the forward-clamp construction (always available on a
    // finite lattice once the barriers are ordered).
    if (report.hard_ok) {
        AssumptionCheck c{"assumption 4 (Mokobodzki witness)", CheckStatus::pass, ""};
        if (spec.witness.has_value()) {
            if (check_mokobodzki_witness(spec, *spec.witness)) {
                c.detail = "supplied witness verified";
            } else {
                c.status = CheckStatus::fail;
                c.detail = "supplied witness fails its invariants";
                report.hard_ok = false;
            }
        } else {
            c.detail = "forward-clamp witness constructed and verified";
            const MokobodzkiWitness w = forward_clamp_witness(lattice, lower, upper);
            ProblemSpec probe = spec;
            probe.witness.reset();
            if (!check_mokobodzki_witness(probe, w)) {
                c.status = CheckStatus::fail; // unreachable with ordered barriers
                c.detail = "forward-clamp witness failed verification";
                report.hard_ok = false;
            }
        }
        report.checks.push_back(c);
    }

    if (!report.hard_ok) {
        std::string what = "problem rejected:";
        for (const auto& c : report.checks)
            if (c.status == CheckStatus::fail) what += " [" + c.name + "] " + c.detail;
        throw HardViolation(what, report);
    }
    return report;
}

bool check_mokobodzki_witness(const ProblemSpec& spec, const MokobodzkiWitness& witness,
                              double tol) {
    const Lattice lattice(spec.grid);
    const int n = lattice.steps();
    const auto sized = [n](const NodeField<double>& f) { return f.steps() == n; };
    if (!sized(witness.x0) || !sized(witness.z0) || !sized(witness.a_up) ||
        !sized(witness.a_dn) || !sized(witness.k_up) || !sized(witness.k_dn))
        throw DimensionMismatch("witness fields do not match the lattice");

    const NodeField<Bound> lower = tabulate_barrier(lattice, spec.barriers.lower);
    const NodeField<Bound> upper = tabulate_barrier(lattice, spec.barriers.upper);
    const double sdt = lattice.sqrt_dt();

    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double x0 = witness.x0(k, j);
            if (lower(k, j).present && x0 < lower(k, j).value - tol) return false;
            if (upper(k, j).present && x0 > upper(k, j).value + tol) return false;
            if (k == n) continue;
            const double au = witness.a_up(k, j), ad = witness.a_dn(k, j);
            const double ku = witness.k_up(k, j), kd = witness.k_dn(k, j);
            if (au < -tol || ad < -tol || ku < -tol || kd < -tol) return false;
            const double z0 = witness.z0(k, j);
            const double up = x0 + au - ku + z0 * sdt;
            const double dn = x0 + ad - kd - z0 * sdt;
            if (std::fabs(witness.x0(k + 1, j + 1) - up) > tol) return false;
            if (std::fabs(witness.x0(k + 1, j) - dn) > tol) return false;
        }
    }
    return true;
}

MokobodzkiWitness forward_clamp_witness(const Lattice& lattice,
                                        const NodeField<Bound>& lower,
                                        const NodeField<Bound>& upper) {
    const int n = lattice.steps();
    MokobodzkiWitness w{NodeField<double>(n, 0.0), NodeField<double>(n, 0.0),
                        NodeField<double>(n, 0.0), NodeField<double>(n, 0.0),
                        NodeField<double>(n, 0.0), NodeField<double>(n, 0.0)};
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            double v = 0.0;
            if (!lower.empty() && lower(k, j).present) v = std::max(v, lower(k, j).value);
            if (!upper.empty() && upper(k, j).present) v = std::min(v, upper(k, j).value);
            w.x0(k, j) = v;
        }
    }
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double du = w.x0(k + 1, j + 1) - w.x0(k, j);
            const double dd = w.x0(k + 1, j) - w.x0(k, j);
            w.a_up(k, j) = du > 0 ? du : 0.0;
            w.k_up(k, j) = du < 0 ? -du : 0.0;
            w.a_dn(k, j) = dd > 0 ? dd : 0.0;
            w.k_dn(k, j) = dd < 0 ? -dd : 0.0;
        }
    }
    return w;
}

} // namespace rbsde
