#include "rbsde/cli.hpp"

#include <CLI11.hpp>

#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Doubly-reflected BSDE laboratory: penalized backward induction on a "
                 "binomial lattice, exact clamped oracle, least-squares Monte Carlo and a "
                 "diagnostics suite"};
    app.require_subcommand(1);

    rbsde::CliOptions options;
    std::string out_dir;
    std::uint64_t seed = 0;

    const std::vector<std::string> commands{"solve", "oracle", "schedule",
                                            "diagnose", "mc", "validate"};
    for (const std::string& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", options.config_path, "JSON run configuration")
            ->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
        sub->add_flag("--quiet", options.quiet, "suppress the stdout summary");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out") > 0) options.out_dir = out_dir;
    if (sub->count("--seed") > 0) options.seed = seed;
    return rbsde::dispatch(sub->get_name(), options);
}
