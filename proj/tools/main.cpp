// Configuration-driven experiment runner for log-correlated chaos simulations.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <string>

#include "circlechaos/experiment.hpp"

using namespace circlechaos;

int main(int argc, char** argv) {
    CLI::App app{"circlechaos: approximation schemes for log-correlated Gaussian chaos"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    std::uint64_t seed_override = 0;
    int replicas_override = 0;

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "path to the config file")->required();
    auto* seed_opt = run->add_option("--seed", seed_override, "override the master seed");
    run->add_option("--out", out_override, "override the output directory");
    run->add_option("--replicas", replicas_override, "override the replica count");

    auto* validate = app.add_subcommand("validate", "parse and validate a config, run nothing");
    validate->add_option("config", config_path, "path to the config file")->required();

    app.add_subcommand("list-experiments", "list the available experiment kinds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list-experiments")) {
            for (ExperimentKind k : all_experiment_kinds()) std::printf("%s\n", experiment_kind_name(k));
            return 0;
        }

        ExperimentConfig config = parse_config(config_path);
        if (app.got_subcommand("validate")) {
            std::printf("valid: %s\n", config.echo().dump().c_str());
            return 0;
        }

        if (seed_opt->count() > 0) config.master_seed = seed_override;
        if (!out_override.empty()) config.out_dir = out_override;
        if (replicas_override > 0) {
            if (replicas_override < 100) {
                std::fprintf(stderr, "error: replicas must be >= 100\n");
                return 2;
            }
            config.replicas = replicas_override;
        }

        ExperimentReport report = run_experiment(config);
        for (const auto& c : report.checks)
            std::printf("%-42s value=%-14.6g tolerance=%-12.6g %s\n", c.name.c_str(), c.value,
                        c.tolerance, c.pass ? "pass" : "FAIL");
        if (report.error) {
            std::fprintf(stderr, "error: %s (partial outputs flagged in report.json)\n",
                         report.error_message.c_str());
            return 3;
        }
        std::printf("%s: %s (%.1fs, outputs in %s)\n", experiment_kind_name(config.kind),
                    report.all_pass() ? "PASS" : "FAIL", report.elapsed_seconds,
                    config.out_dir.c_str());
        return report.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
