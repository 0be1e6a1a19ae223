#pragma once

#include "rbsde/expr.hpp"
#include "rbsde/model.hpp"
#include "rbsde/montecarlo.hpp"
#include "rbsde/runner.hpp"

#include <string>
#include <vector>

namespace rbsde {

struct ConfigSyntax : Error {
    using Error::Error;
};

struct SchemaError : Error {
    using Error::Error;
};

struct ExprError : Error {
    using Error::Error;
};

enum class SolverKind { lattice, mc };

struct McParams {
    int paths = 10000;
    std::uint64_t seed = 12345;
    int basis_degree = 4;
    IncrementMode increments = IncrementMode::coin;
};

struct OutputPlan {
    std::string dir = "out";
    bool csv = true;
    bool json = true;
};

struct RunPlan {
    SolverKind solver = SolverKind::lattice;
    McParams mc;
    PenalizationSchedule schedule;
    OutputPlan output;
};

struct LoadedRun {
    ProblemSpec spec;
    RunPlan plan;
    std::string config_hash; // stable FNV-1a digest of the canonical config
    // expressions kept for reporting
    std::string driver_src, terminal_src, lower_src, upper_src;
};

/// Parses and validates the JSON run configuration. Unknown keys and wrong
/// types raise SchemaError; malformed JSON raises ConfigSyntax with the byte
/// position; expression problems (including the free-variable discipline:
/// driver over {t,y,z}, barriers over {t,x}, terminal over {x}) raise
/// ExprError.
LoadedRun load_config(const std::string& path);

/// Same, from an in-memory JSON document (for tests).
LoadedRun load_config_text(const std::string& text);

} // namespace rbsde
