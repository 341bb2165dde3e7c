#include <CLI11.hpp>

#include "commands.hpp"

using ttc::cli::CompareArgs;
using ttc::cli::EvalArgs;
using ttc::cli::GenerateArgs;
using ttc::cli::TrainArgs;

namespace {

// CLI11 uses its own exit-code scheme; fold every parse failure into 1.
int parse_or_exit(CLI::App& app, int argc, char** argv, int& code) {
    try {
        app.parse(argc, argv);
        return -1;
    } catch (const CLI::CallForHelp& e) {
        code = app.exit(e);
        return code;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        code = ttc::cli::kExitUsageOrIo;
        return code;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-level hierarchical classification head: taxonomy tooling, "
                 "training, evaluation and flat-vs-ttc comparison"};
    app.require_subcommand(1);

    std::string taxonomy_path;

    auto* validate = app.add_subcommand("validate", "Check a taxonomy file");
    validate->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON file")->required();

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a synthetic JSONL dataset");
    generate->add_option("--taxonomy", gen.taxonomy_path, "Taxonomy JSON file")->required();
    generate->add_option("--synthetic", gen.synthetic_path, "Synthetic spec JSON file")
        ->required();
    generate->add_option("--seed", gen.seed, "Generator seed");
    generate->add_option("--out", gen.out_path, "Output JSONL path")->required();

    TrainArgs train;
    std::uint64_t train_seed = 0;
    double train_tau = 0.0;
    std::vector<double> train_pi;
    bool train_detach = false;
    auto* train_cmd = app.add_subcommand("train", "Train a classification head");
    train_cmd->add_option("--taxonomy", train.taxonomy_path, "Taxonomy JSON file")
        ->required();
    train_cmd->add_option("--data", train.data_path, "Dataset JSONL file");
    train_cmd->add_option("--synthetic", train.synthetic_path, "Synthetic spec JSON file");
    train_cmd->add_option("--config", train.config_path, "Train config JSON file");
    train_cmd->add_option("--mode", train.mode, "Head mode: ttc or flat")
        ->check(CLI::IsMember({"ttc", "flat"}));
    train_cmd->add_option("--out", train.out_path, "Checkpoint output path")->required();
    auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Seed override");
    auto* train_tau_opt =
        train_cmd->add_option("--tau", train_tau, "Softmax temperature override");
    auto* train_pi_opt = train_cmd->add_option("--pi", train_pi, "Per-level loss weights")
                             ->delimiter(',');
    auto* train_detach_opt = train_cmd->add_flag(
        "--detach-chain", train_detach,
        "Do not backpropagate through the attention chain");

    EvalArgs eval;
    std::string eval_mode;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("checkpoint", eval.checkpoint_path, "Checkpoint JSON file")
        ->required();
    eval_cmd->add_option("--taxonomy", eval.taxonomy_path, "Taxonomy JSON file")
        ->required();
    eval_cmd->add_option("--data", eval.data_path, "Dataset JSONL file")->required();
    auto* eval_mode_opt = eval_cmd->add_option("--mode", eval_mode, "Head mode override")
                              ->check(CLI::IsMember({"ttc", "flat"}));

    CompareArgs compare;
    std::uint64_t compare_seed = 0;
    double compare_tau = 0.0;
    std::vector<double> compare_pi;
    bool compare_detach = false;
    auto* compare_cmd =
        app.add_subcommand("compare", "Train and evaluate flat and ttc heads per seed");
    compare_cmd->add_option("--taxonomy", compare.taxonomy_path, "Taxonomy JSON file")
        ->required();
    compare_cmd->add_option("--data", compare.data_path, "Dataset JSONL file");
    compare_cmd->add_option("--synthetic", compare.synthetic_path,
                            "Synthetic spec JSON file");
    compare_cmd->add_option("--config", compare.config_path, "Train config JSON file");
    compare_cmd->add_option("--seeds", compare.seeds, "Number of seeds")
        ->check(CLI::PositiveNumber);
    auto* compare_seed_opt =
        compare_cmd->add_option("--seed", compare_seed, "Base seed override");
    auto* compare_tau_opt =
        compare_cmd->add_option("--tau", compare_tau, "Softmax temperature override");
    auto* compare_pi_opt =
        compare_cmd->add_option("--pi", compare_pi, "Per-level loss weights")
            ->delimiter(',');
    auto* compare_detach_opt = compare_cmd->add_flag(
        "--detach-chain", compare_detach,
        "Do not backpropagate through the attention chain");
    compare_cmd->add_option("--out", compare.out_csv, "Per-seed CSV output path");

    int code = 0;
    if (parse_or_exit(app, argc, argv, code) >= 0) return code;

    if (validate->parsed()) return ttc::cli::run_validate(taxonomy_path);
    if (generate->parsed()) return ttc::cli::run_generate(gen);
    if (train_cmd->parsed()) {
        if (train_seed_opt->count()) train.seed = train_seed;
        if (train_tau_opt->count()) train.tau = train_tau;
        if (train_pi_opt->count()) train.pi = train_pi;
        if (train_detach_opt->count()) train.detach_chain = train_detach;
        return ttc::cli::run_train(train);
    }
    if (eval_cmd->parsed()) {
        if (eval_mode_opt->count()) eval.mode = eval_mode;
        return ttc::cli::run_eval(eval);
    }
    if (compare_cmd->parsed()) {
        if (compare_seed_opt->count()) compare.seed = compare_seed;
        if (compare_tau_opt->count()) compare.tau = compare_tau;
        if (compare_pi_opt->count()) compare.pi = compare_pi;
        if (compare_detach_opt->count()) compare.detach_chain = compare_detach;
        return ttc::cli::run_compare(compare);
    }
    return ttc::cli::kExitUsageOrIo;
}
