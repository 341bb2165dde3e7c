#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttc/data.hpp"
#include "ttc/metrics.hpp"
#include "ttc/taxonomy.hpp"
#include "ttc/training.hpp"

namespace ttc::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsageOrIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitMismatch = 3;

struct GenerateArgs {
    std::string taxonomy_path;
    std::string synthetic_path;
    std::uint64_t seed = 42;
    std::string out_path;
};

struct TrainArgs {
    std::string taxonomy_path;
    std::string data_path;      // exactly one of data/synthetic
    std::string synthetic_path;
    std::string config_path;
    std::string mode = "ttc";
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<std::vector<double>> pi;
    std::optional<bool> detach_chain;
};

struct EvalArgs {
    std::string checkpoint_path;
    std::string taxonomy_path;
    std::string data_path;
    std::optional<std::string> mode; // overrides the checkpoint's mode
};

struct CompareArgs {
    std::string taxonomy_path;
    std::string data_path;
    std::string synthetic_path;
    std::string config_path;
    std::size_t seeds = 1;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<std::vector<double>> pi;
    std::optional<bool> detach_chain;
    std::string out_csv = "compare.csv";
};

int run_validate(const std::string& taxonomy_path);
int run_generate(const GenerateArgs& args);
int run_train(const TrainArgs& args);
int run_eval(const EvalArgs& args);
int run_compare(const CompareArgs& args);

// The flat-vs-ttc experiment behind `compare`, reusable in-process.
struct SeedOutcome {
    std::uint64_t seed = 0;
    EvaluationReport flat;
    EvaluationReport ttc;
};

struct CompareOutcome {
    std::vector<SeedOutcome> per_seed;
    EvaluationReport flat_mean;
    EvaluationReport ttc_mean;
    EvaluationReport delta; // ttc_mean - flat_mean, field by field
};

// Per seed s in [base_seed, base_seed + num_seeds): splits 80/20, trains both
// heads on the identical split with that seed, evaluates on the held-out side.
CompareOutcome compare_experiment(const Taxonomy& taxonomy, const Dataset& dataset,
                                  const TrainConfig& base_config,
                                  std::size_t num_seeds);

std::string compare_to_json(const CompareOutcome& outcome, const TrainConfig& cfg);
std::string compare_to_csv(const CompareOutcome& outcome, std::size_t num_levels);

// Config file + flag overrides shared by train and compare.
TrainConfig resolve_config(const std::string& config_path,
                           const std::optional<std::uint64_t>& seed,
                           const std::optional<double>& tau,
                           const std::optional<std::vector<double>>& pi,
                           const std::optional<bool>& detach_chain);

} // namespace ttc::cli
