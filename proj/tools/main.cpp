#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>

#include "config.hpp"
#include "runner.hpp"

// Exit codes: 0 all verdicts PASS or NOT-APPLICABLE, 1 some FAIL, 2 bad
// invocation or config, 3 runtime error.
int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::warn);
    spdlog::cfg::load_env_levels();  // SPDLOG_LEVEL=info|debug|...

    CLI::App app{"Entropy estimation and verification for impulsive semiflows"};
    app.require_subcommand(1);
    std::string config_path, output_dir;
    int threads = -1;
    long long seed = -1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "YAML experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--output-dir", output_dir, "Directory for CSV output (overrides output_dir)");
        sub->add_option("--threads", threads, "Worker threads, 0 for the OpenMP default")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "Seed for sample jitter and random checks")->check(CLI::NonNegativeNumber);
    };
    CLI::App* run = app.add_subcommand("run", "Estimate entropies and check the inequality chains");
    CLI::App* verify = app.add_subcommand("verify", "Run the inclusion, chain, metricity and semiconjugation checks");
    add_common(run);
    add_common(verify);
    CLI11_PARSE(app, argc, argv);

    sfe::cli::ExperimentConfig cfg;
    try {
        cfg = sfe::cli::load_config(config_path);
    } catch (const sfe::cli::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (threads >= 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    try {
        const auto mode = run->parsed() ? sfe::cli::Mode::run : sfe::cli::Mode::verify;
        const sfe::cli::RunSummary s = sfe::cli::execute(cfg, mode);
        std::cout << sfe::cli::format_summary(s);
        return s.any_fail() ? 1 : 0;
    } catch (const sfe::cli::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
