#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttc/checkpoint.hpp"
#include "ttc/errors.hpp"
#include "ttc/evaluate.hpp"
#include "ttc/log.hpp"

namespace ttc::cli {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// Runs a command body and maps failures onto the exit-code contract.
template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const MismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsageOrIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsageOrIo;
    }
}

Dataset load_or_generate(const std::string& data_path,
                         const std::string& synthetic_path, const Taxonomy& taxonomy,
                         std::uint64_t seed) {
    if (!data_path.empty() && !synthetic_path.empty())
        throw IoError("give either --data or --synthetic, not both");
    if (!data_path.empty()) return load_jsonl(data_path, taxonomy);
    if (!synthetic_path.empty()) {
        const SyntheticSpec spec =
            load_synthetic_spec_file(synthetic_path, taxonomy.num_levels());
        return generate_synthetic(taxonomy, spec, seed);
    }
    throw IoError("one of --data or --synthetic is required");
}

json report_json(const EvaluationReport& r) {
    return json::parse(report_to_json(r));
}

EvaluationReport mean_report(const std::vector<EvaluationReport>& reports) {
    EvaluationReport mean;
    const double k = static_cast<double>(reports.size());
    const std::size_t n = reports.front().level_accuracy.size();
    mean.level_accuracy.assign(n, 0.0);
    mean.rescue.assign(n, 0.0);
    for (const auto& r : reports) {
        mean.hf1 += r.hf1;
        mean.h_precision += r.h_precision;
        mean.h_recall += r.h_recall;
        mean.consistency += r.consistency;
        mean.exact_match += r.exact_match;
        for (std::size_t i = 0; i < n; ++i) {
            mean.level_accuracy[i] += r.level_accuracy[i];
            mean.rescue[i] += r.rescue[i];
        }
    }
    mean.hf1 /= k;
    mean.h_precision /= k;
    mean.h_recall /= k;
    mean.consistency /= k;
    mean.exact_match /= k;
    for (std::size_t i = 0; i < n; ++i) {
        mean.level_accuracy[i] /= k;
        mean.rescue[i] /= k;
    }
    mean.instance_count = reports.front().instance_count;
    return mean;
}

EvaluationReport diff_report(const EvaluationReport& a, const EvaluationReport& b) {
    EvaluationReport d;
    d.hf1 = a.hf1 - b.hf1;
    d.h_precision = a.h_precision - b.h_precision;
    d.h_recall = a.h_recall - b.h_recall;
    d.consistency = a.consistency - b.consistency;
    d.exact_match = a.exact_match - b.exact_match;
    const std::size_t n = a.level_accuracy.size();
    for (std::size_t i = 0; i < n; ++i) {
        d.level_accuracy.push_back(a.level_accuracy[i] - b.level_accuracy[i]);
        d.rescue.push_back(a.rescue[i] - b.rescue[i]);
    }
    d.instance_count = a.instance_count;
    return d;
}

void csv_metrics(std::ostream& out, const EvaluationReport& r, bool with_instances) {
    out << format_double(r.hf1) << "," << format_double(r.h_precision) << ","
        << format_double(r.h_recall) << "," << format_double(r.consistency) << ","
        << format_double(r.exact_match);
    for (double a : r.level_accuracy) out << "," << format_double(a);
    for (double a : r.rescue) out << "," << format_double(a);
    out << "," << (with_instances ? r.instance_count : 0);
}

} // namespace

TrainConfig resolve_config(const std::string& config_path,
                           const std::optional<std::uint64_t>& seed,
                           const std::optional<double>& tau,
                           const std::optional<std::vector<double>>& pi,
                           const std::optional<bool>& detach_chain) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = train_config_from_json(read_file(config_path));
    if (seed) cfg.seed = *seed;
    if (tau) cfg.tau = *tau;
    if (pi) cfg.pi = *pi;
    if (detach_chain) cfg.detach_chain = *detach_chain;
    return cfg;
}

int run_validate(const std::string& taxonomy_path) {
    return guarded([&] {
        const std::string text = read_file(taxonomy_path);
        Taxonomy taxonomy = Taxonomy::parse(text); // throws listing violations
        const ValidationResult result = taxonomy.validate();
        if (!result.ok()) {
            for (const auto& v : result.violations) std::cout << v << "\n";
            return kExitValidation;
        }
        std::cout << "ok\n";
        return kExitOk;
    });
}

int run_generate(const GenerateArgs& args) {
    return guarded([&] {
        const Taxonomy taxonomy = load_taxonomy_file(args.taxonomy_path);
        const SyntheticSpec spec =
            load_synthetic_spec_file(args.synthetic_path, taxonomy.num_levels());
        const Dataset ds = generate_synthetic(taxonomy, spec, args.seed);
        std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write dataset file: " + args.out_path);
        write_jsonl(out, ds, taxonomy);
        if (!out) throw IoError("failed writing dataset file: " + args.out_path);
        log::info("generated " + std::to_string(ds.size()) + " instances -> " +
                  args.out_path);
        return kExitOk;
    });
}

int run_train(const TrainArgs& args) {
    return guarded([&] {
        const Taxonomy taxonomy = load_taxonomy_file(args.taxonomy_path);
        const TrainConfig cfg = resolve_config(args.config_path, args.seed, args.tau,
                                               args.pi, args.detach_chain);
        const HeadMode mode = head_mode_from_string(args.mode);
        const Dataset dataset =
            load_or_generate(args.data_path, args.synthetic_path, taxonomy, cfg.seed);

        const TrainResult result = train(dataset, taxonomy, cfg, mode);

        save_checkpoint(args.out_path,
                        Checkpoint{result.params, cfg.tau, taxonomy.sha256(), mode});
        std::filesystem::path history_path(args.out_path);
        history_path.replace_extension(".history.csv");
        {
            std::ofstream out(history_path, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write history file: " + history_path.string());
            write_history_csv(out, result.history, taxonomy.num_levels());
        }

        json summary;
        summary["mode"] = to_string(mode);
        summary["seed"] = cfg.seed;
        summary["epochs"] = result.history.size();
        if (!result.history.empty()) {
            std::size_t best = 0;
            for (std::size_t e = 1; e < result.history.size(); ++e)
                if (result.history[e].mean_level_accuracy() >
                    result.history[best].mean_level_accuracy())
                    best = e;
            const auto& rec = result.history[best];
            summary["best_epoch"] = best + 1;
            summary["loss"] = rec.loss;
            summary["level_accuracy"] = rec.level_accuracy;
            summary["exact_match"] = rec.exact_match;
        }
        std::cout << summary.dump() << "\n";
        return kExitOk;
    });
}

int run_eval(const EvalArgs& args) {
    return guarded([&] {
        const Taxonomy taxonomy = load_taxonomy_file(args.taxonomy_path);
        const Checkpoint ckpt = load_checkpoint(args.checkpoint_path, taxonomy);
        const Dataset dataset = load_jsonl(args.data_path, taxonomy);
        if (dataset.empty()) throw ValidationError("empty dataset: " + args.data_path);
        const HeadMode mode =
            args.mode ? head_mode_from_string(*args.mode) : ckpt.mode;
        const EvaluationReport report =
            evaluate_head(ckpt.params, mode, ckpt.tau, dataset, taxonomy);
        std::cout << report_to_json(report) << "\n";
        return kExitOk;
    });
}

CompareOutcome compare_experiment(const Taxonomy& taxonomy, const Dataset& dataset,
                                  const TrainConfig& base_config,
                                  std::size_t num_seeds) {
    if (num_seeds < 1) throw ValidationError("compare: need at least one seed");
    CompareOutcome outcome;
    std::vector<EvaluationReport> flats, ttcs;
    for (std::size_t j = 0; j < num_seeds; ++j) {
        TrainConfig cfg = base_config;
        cfg.seed = base_config.seed + j;
        const auto [train_ds, test_ds] = split(dataset, 0.8, cfg.seed);

        const TrainResult flat = train(train_ds, taxonomy, cfg, HeadMode::flat);
        const TrainResult ttc = train(train_ds, taxonomy, cfg, HeadMode::ttc);
        SeedOutcome seed_outcome;
        seed_outcome.seed = cfg.seed;
        seed_outcome.flat =
            evaluate_head(flat.params, HeadMode::flat, cfg.tau, test_ds, taxonomy);
        seed_outcome.ttc =
            evaluate_head(ttc.params, HeadMode::ttc, cfg.tau, test_ds, taxonomy);
        log::info("seed " + std::to_string(cfg.seed) + ": flat exact_match " +
                  format_double(seed_outcome.flat.exact_match) + ", ttc exact_match " +
                  format_double(seed_outcome.ttc.exact_match));
        flats.push_back(seed_outcome.flat);
        ttcs.push_back(seed_outcome.ttc);
        outcome.per_seed.push_back(std::move(seed_outcome));
    }
    outcome.flat_mean = mean_report(flats);
    outcome.ttc_mean = mean_report(ttcs);
    outcome.delta = diff_report(outcome.ttc_mean, outcome.flat_mean);
    return outcome;
}

std::string compare_to_json(const CompareOutcome& outcome, const TrainConfig& cfg) {
    json doc;
    doc["flat"] = report_json(outcome.flat_mean);
    doc["ttc"] = report_json(outcome.ttc_mean);
    json delta = report_json(outcome.delta);
    delta.erase("instance_count");
    doc["delta"] = delta;
    doc["config"] = json::parse(train_config_to_json(cfg));
    json seeds = json::array();
    for (const auto& s : outcome.per_seed) seeds.push_back(s.seed);
    doc["seeds"] = seeds;
    return doc.dump();
}

std::string compare_to_csv(const CompareOutcome& outcome, std::size_t num_levels) {
    std::ostringstream out;
    out << "seed,mode,hf1,h_precision,h_recall,consistency,exact_match";
    for (std::size_t i = 1; i <= num_levels; ++i) out << ",acc_l" << i;
    for (std::size_t i = 1; i <= num_levels; ++i) out << ",rescue_l" << i;
    out << ",instances\n";
    for (const auto& s : outcome.per_seed) {
        out << s.seed << ",flat,";
        csv_metrics(out, s.flat, true);
        out << "\n" << s.seed << ",ttc,";
        csv_metrics(out, s.ttc, true);
        out << "\n";
    }
    out << "mean,flat,";
    csv_metrics(out, outcome.flat_mean, true);
    out << "\nmean,ttc,";
    csv_metrics(out, outcome.ttc_mean, true);
    out << "\ndelta,ttc-flat,";
    csv_metrics(out, outcome.delta, false);
    out << "\n";
    return out.str();
}

int run_compare(const CompareArgs& args) {
    return guarded([&] {
        if (args.seeds < 1) {
            std::cerr << "error: --seeds must be >= 1\n";
            return kExitUsageOrIo;
        }
        const Taxonomy taxonomy = load_taxonomy_file(args.taxonomy_path);
        const TrainConfig cfg = resolve_config(args.config_path, args.seed, args.tau,
                                               args.pi, args.detach_chain);
        const Dataset dataset =
            load_or_generate(args.data_path, args.synthetic_path, taxonomy, cfg.seed);

        const CompareOutcome outcome =
            compare_experiment(taxonomy, dataset, cfg, args.seeds);

        std::ofstream csv(args.out_csv, std::ios::binary | std::ios::trunc);
        if (!csv) throw IoError("cannot write csv file: " + args.out_csv);
        csv << compare_to_csv(outcome, taxonomy.num_levels());
        if (!csv) throw IoError("failed writing csv file: " + args.out_csv);

        std::cout << compare_to_json(outcome, cfg) << "\n";
        return kExitOk;
    });
}

} // namespace ttc::cli
