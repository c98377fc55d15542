#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "circlechaos/kernels.hpp"

namespace circlechaos {

enum class ExperimentKind {
    CovarianceValidation,
    GapCurves,
    CrossSchemeKS,
    CoupledConvergence,
    CriticalMassTrend,
    SecondMomentCheck,
    ZepsBounds,
    KahaneDirection,
    PerturbationCheck,
};

const char* experiment_kind_name(ExperimentKind k);
std::vector<ExperimentKind> all_experiment_kinds();

// Parsed, validated, defaults-filled experiment configuration. Every numeric
// output of run_experiment is a function of this struct alone.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::CovarianceValidation;
    std::uint64_t master_seed = 12345;
    std::string out_dir = "results";
    int m = 256;
    int replicas = 10000;
    double beta = 1.0;

    Scheme scheme = Scheme::FourierPartial;
    Scheme scheme_a = Scheme::FourierPartial;
    Scheme scheme_b = Scheme::WhiteNoiseCone;
    Mollifier mollifier = Mollifier::Gaussian;
    double level = 64.0;
    std::vector<double> levels;
    std::vector<double> eps_list;
    int pairs = 20;
    int num_seeds = 10;
    std::string level_map = "auto";  // "auto" | "log" | "identity"
    std::map<std::string, double> tolerance_overrides;

    nlohmann::json echo() const;
};

// Strict parse: unknown keys are rejected by name, defaults filled, invariants
// checked (replicas >= 100, m a power of two in [2^5, 2^12], beta in (0,1]).
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_json(const nlohmann::json& j);

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string render() const;  // header + rows, '.' decimals, LF endings
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CheckResult> checks;
    double elapsed_seconds = 0.0;
    bool error = false;          // partial outputs are flagged
    std::string error_message;

    bool all_pass() const;
    nlohmann::json to_json() const;
};

// Runs the configured experiment, writes report.json plus one CSV per check
// table under config.out_dir (atomic temp + rename), and returns the report.
// Deterministic: (config, master_seed) fixes every numeric output byte for byte.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string format_csv_double(double v);

}  // namespace circlechaos
