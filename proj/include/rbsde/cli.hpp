#pragma once

#include "rbsde/config.hpp"

#include <optional>
#include <string>

namespace rbsde {

struct CliOptions {
    std::string config_path;
    std::optional<std::string> out_dir; // overrides output.dir
    std::optional<std::uint64_t> seed;  // overrides mc.seed
    bool quiet = false;
};

/// Runs one subcommand end to end and returns the process exit code:
/// 0 success, 1 usage/config error, 2 problem validation failure,
/// 3 solver failure, 4 diagnostic invariant violation.
/// Subcommands: solve, oracle, schedule, diagnose, mc, validate.
int dispatch(const std::string& command, const CliOptions& options);

} // namespace rbsde
