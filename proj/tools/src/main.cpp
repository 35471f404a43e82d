#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fedcurr/cli/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Federated curriculum-learning simulator and convergence-bound checker"};
    app.require_subcommand(1);

    fedcurr::cli::Options opts;
    std::string config;
    std::string out;
    std::size_t threads = 0;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "Configuration file")->required();
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--threads", threads, "Worker threads (default: $FEDCURR_THREADS or 1)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Override the base seed");
    };
    CLI::App* run = app.add_subcommand("run", "Run a federated training experiment and write metrics CSVs");
    CLI::App* verify = app.add_subcommand("verify", "Check the convergence bounds on a grid of cases");
    add_common(run);
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    opts.config = config;
    for (CLI::App* sub : {run, verify}) {
        if (!sub->parsed()) continue;
        if (sub->count("--out") > 0) opts.out_dir = out;
        if (sub->count("--threads") > 0) opts.threads = threads;
        if (sub->count("--seed") > 0) opts.seed = seed;
    }
    if (run->parsed()) return fedcurr::cli::run_command(opts, std::cout, std::cerr);
    return fedcurr::cli::verify_command(opts, std::cout, std::cerr);
}
