#include "rbsde/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace rbsde {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const char* where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key))
            throw SchemaError(std::string("unknown key '") + key + "' in " + where);
    }
}

double get_number(const json& obj, const char* key, std::optional<double> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw SchemaError(std::string("missing required key '") + key + "'");
    }
    if (!obj[key].is_number())
        throw SchemaError(std::string("key '") + key + "' must be a number");
    return obj[key].get<double>();
}

std::string get_string(const json& obj, const char* key,
                       std::optional<std::string> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw SchemaError(std::string("missing required key '") + key + "'");
    }
    if (!obj[key].is_string())
        throw SchemaError(std::string("key '") + key + "' must be a string");
    return obj[key].get<std::string>();
}

dsl::Expr parse_expr_field(const std::string& src, const char* field,
                           const std::set<char>& allowed) {
    dsl::Expr e;
    try {
        e = dsl::parse(src);
    } catch (const Error& err) {
        throw ExprError(std::string("in '") + field + "': " + err.what());
    }
    for (char v : dsl::free_vars(e)) {
        if (!allowed.count(v))
            throw ExprError(std::string("in '") + field + "': variable '" + std::string(1, v) +
                            "' not allowed (free variables must be a subset of the field's domain)");
    }
    return e;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> get_number_list(const json& obj, const char* key,
                                    std::vector<double> fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_array())
        throw SchemaError(std::string("key '") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number())
            throw SchemaError(std::string("key '") + key + "' must contain numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

LoadedRun load_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigSyntax(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("config root must be a JSON object");

    require_keys(doc, "config", {"horizon", "steps", "driver", "growth_k", "terminal", "lower",
                                 "upper", "solver", "mc", "penalty", "output"});

    LoadedRun run{ProblemSpec{TimeGrid(1.0, 1), {}, {}, {}, {}}, {}, "", "", "", "", ""};

    const double horizon = get_number(doc, "horizon");
    if (!(horizon > 0.0)) throw SchemaError("'horizon' must be positive");
    const double steps_raw = get_number(doc, "steps", 100.0);
    const int steps = static_cast<int>(steps_raw);
    if (steps < 1 || steps != steps_raw) throw SchemaError("'steps' must be a positive integer");
    run.spec.grid = TimeGrid(horizon, steps);

    run.driver_src = get_string(doc, "driver");
    run.terminal_src = get_string(doc, "terminal");
    run.lower_src = get_string(doc, "lower", std::string("none"));
    run.upper_src = get_string(doc, "upper", std::string("none"));

    const double growth_k = get_number(doc, "growth_k");
    if (!(growth_k > 0.0)) throw SchemaError("'growth_k' must be positive");

    const dsl::Expr driver_expr = parse_expr_field(run.driver_src, "driver", {'t', 'y', 'z'});
    run.spec.driver.growth_k = growth_k;
    run.spec.driver.f = [driver_expr](double t, double y, double z) {
        return dsl::eval(driver_expr, dsl::Env::tyz(t, y, z));
    };

    const dsl::Expr terminal_expr = parse_expr_field(run.terminal_src, "terminal", {'x'});
    run.spec.terminal.xi = [terminal_expr](double x) {
        return dsl::eval(terminal_expr, dsl::Env::just_x(x));
    };

    const auto barrier_side = [](const std::string& src, const char* field) {
        if (src == "none") return BarrierSide::unbounded();
        const dsl::Expr e = parse_expr_field(src, field, {'t', 'x'});
        return BarrierSide::of(
            [e](double t, double x) { return dsl::eval(e, dsl::Env::tx(t, x)); });
    };
    run.spec.barriers.lower = barrier_side(run.lower_src, "lower");
    run.spec.barriers.upper = barrier_side(run.upper_src, "upper");

    const std::string solver = get_string(doc, "solver", std::string("lattice"));
    if (solver == "lattice") {
        run.plan.solver = SolverKind::lattice;
    } else if (solver == "mc") {
        run.plan.solver = SolverKind::mc;
    } else {
        throw SchemaError("'solver' must be \"lattice\" or \"mc\"");
    }

    if (doc.contains("mc")) {
        const json& mc = doc["mc"];
        if (!mc.is_object()) throw SchemaError("'mc' must be an object");
        require_keys(mc, "'mc'", {"paths", "seed", "basis_degree", "increments"});
        const double paths = get_number(mc, "paths", 10000.0);
        if (paths < 1 || paths != std::floor(paths))
            throw SchemaError("'mc.paths' must be a positive integer");
        run.plan.mc.paths = static_cast<int>(paths);
        const double seed = get_number(mc, "seed", 12345.0);
        if (seed < 0 || seed != std::floor(seed))
            throw SchemaError("'mc.seed' must be a nonnegative integer");
        run.plan.mc.seed = static_cast<std::uint64_t>(seed);
        const double deg = get_number(mc, "basis_degree", 4.0);
        if (deg < 0 || deg != std::floor(deg))
            throw SchemaError("'mc.basis_degree' must be a nonnegative integer");
        run.plan.mc.basis_degree = static_cast<int>(deg);
        const std::string mode = get_string(mc, "increments", std::string("coin"));
        if (mode == "coin") {
            run.plan.mc.increments = IncrementMode::coin;
        } else if (mode == "gaussian") {
            run.plan.mc.increments = IncrementMode::gaussian;
        } else {
            throw SchemaError("'mc.increments' must be \"coin\" or \"gaussian\"");
        }
    }

    PenalizationSchedule& sched = run.plan.schedule;
    sched.m = {4, 16, 64, 256, 1024};
    sched.n = {1024};
    sched.tie_p_to_m = true;
    if (doc.contains("penalty")) {
        const json& pen = doc["penalty"];
        if (!pen.is_object()) throw SchemaError("'penalty' must be an object");
        require_keys(pen, "'penalty'", {"p", "m", "n", "tie_p_to_m"});
        sched.m = get_number_list(pen, "m", sched.m);
        sched.n = get_number_list(pen, "n", sched.n);
        const std::vector<double> p_raw = get_number_list(pen, "p", {});
        for (double v : p_raw) {
            if (v != std::floor(v) || v < 1)
                throw SchemaError("'penalty.p' must contain positive integers");
            sched.p.push_back(static_cast<int>(v));
        }
        if (pen.contains("tie_p_to_m")) {
            if (!pen["tie_p_to_m"].is_boolean())
                throw SchemaError("'penalty.tie_p_to_m' must be a boolean");
            sched.tie_p_to_m = pen["tie_p_to_m"].get<bool>();
        }
        if (!sched.tie_p_to_m && sched.p.empty())
            throw SchemaError("'penalty.p' required when tie_p_to_m is false");
    }
    try {
        sched.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("'penalty': ") + e.what());
    }

    if (doc.contains("output")) {
        const json& out = doc["output"];
        if (!out.is_object()) throw SchemaError("'output' must be an object");
        require_keys(out, "'output'", {"dir", "formats"});
        run.plan.output.dir = get_string(out, "dir", run.plan.output.dir);
        if (out.contains("formats")) {
            if (!out["formats"].is_array())
                throw SchemaError("'output.formats' must be an array");
            run.plan.output.csv = false;
            run.plan.output.json = false;
            for (const auto& f : out["formats"]) {
                if (!f.is_string()) throw SchemaError("'output.formats' must contain strings");
                const std::string s = f.get<std::string>();
                if (s == "csv") {
                    run.plan.output.csv = true;
                } else if (s == "json") {
                    run.plan.output.json = true;
                } else {
                    throw SchemaError("unknown format '" + s + "' (csv or json)");
                }
            }
        }
    }

    // canonical form: nlohmann keeps object keys sorted, so the dump is
    // independent of the key order in the file
    run.config_hash = hash_hex(fnv1a(doc.dump()));
    return run;
}

LoadedRun load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigSyntax("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config_text(buf.str());
}

} // namespace rbsde
