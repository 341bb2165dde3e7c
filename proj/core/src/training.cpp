#include "ttc/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ttc/errors.hpp"

namespace ttc {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_config(const TrainConfig& cfg) {
    require(cfg.learning_rate > 0.0, "config: learning_rate must be > 0");
    require(cfg.batch_size >= 1, "config: batch_size must be >= 1");
    require(cfg.dropout >= 0.0 && cfg.dropout < 1.0, "config: dropout must be in [0, 1)");
    require(cfg.early_stop_patience >= 1, "config: early_stop_patience must be >= 1");
    require(cfg.tau > 0.0, "config: tau must be > 0");
    require(cfg.weight_decay >= 0.0, "config: weight_decay must be >= 0");
}

// Shortest round-trip decimal form; keeps identical doubles byte-identical
// across runs.
std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void adamw_tensor(double* p, const double* g, double* m, double* v, std::size_t n,
                  double lr, double wd, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * (mhat / (std::sqrt(vhat) + kEps) + wd * p[i]);
    }
}

} // namespace

const char* to_string(HeadMode mode) {
    return mode == HeadMode::ttc ? "ttc" : "flat";
}

HeadMode head_mode_from_string(const std::string& s) {
    if (s == "ttc") return HeadMode::ttc;
    if (s == "flat") return HeadMode::flat;
    throw ValidationError("mode must be 'ttc' or 'flat', got '" + s + "'");
}

OptimizerState OptimizerState::zeros_like(const HeadParameters& p) {
    OptimizerState s;
    s.levels.reserve(p.levels.size());
    for (const auto& level : p.levels) {
        Slot slot;
        slot.m_W = Matrix(level.W.rows, level.W.cols, 0.0);
        slot.v_W = Matrix(level.W.rows, level.W.cols, 0.0);
        slot.m_b = Vector(level.b.size(), 0.0);
        slot.v_b = Vector(level.b.size(), 0.0);
        s.levels.push_back(std::move(slot));
    }
    return s;
}

double EpochStats::mean_level_accuracy() const {
    if (level_accuracy.empty()) return 0.0;
    double sum = 0.0;
    for (double a : level_accuracy) sum += a;
    return sum / static_cast<double>(level_accuracy.size());
}

void adamw_step(HeadParameters& p, const Gradients& g, OptimizerState& s,
                const TrainConfig& cfg) {
    check_config(cfg);
    require(g.levels.size() == p.levels.size(), "adamw: level count mismatch");
    require(s.levels.size() == p.levels.size(), "adamw: state level count mismatch");
    s.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < p.levels.size(); ++i) {
        auto& level = p.levels[i];
        const auto& grad = g.levels[i];
        auto& slot = s.levels[i];
        require(grad.dW.rows == level.W.rows && grad.dW.cols == level.W.cols &&
                    grad.db.size() == level.b.size(),
                "adamw: gradient shape mismatch");
        adamw_tensor(level.W.data.data(), grad.dW.data.data(), slot.m_W.data.data(),
                     slot.v_W.data.data(), level.W.data.size(), cfg.learning_rate,
                     cfg.weight_decay, bc1, bc2);
        adamw_tensor(level.b.data(), grad.db.data(), slot.m_b.data(),
                     slot.v_b.data(), level.b.size(), cfg.learning_rate,
                     cfg.weight_decay, bc1, bc2);
    }
}

bool early_stop_check(const TrainHistory& history, std::size_t patience) {
    require(!history.empty(), "early_stop_check: empty history");
    require(patience >= 1, "early_stop_check: patience must be >= 1");
    double best = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (const auto& epoch : history) {
        const double acc = epoch.mean_level_accuracy();
        if (acc > best) {
            best = acc;
            stale = 0;
        } else {
            ++stale;
        }
    }
    return stale >= patience;
}

HeadParameters init_parameters(const Taxonomy& taxonomy, std::size_t feature_dim,
                               std::uint64_t seed) {
    require(feature_dim >= 1, "init: feature_dim must be >= 1");
    std::mt19937_64 rng(seed);
    const double bound = std::sqrt(1.0 / static_cast<double>(feature_dim));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    HeadParameters p;
    p.feature_dim = feature_dim;
    p.levels.reserve(taxonomy.num_levels());
    for (std::size_t level = 1; level <= taxonomy.num_levels(); ++level) {
        LevelParameters lp;
        lp.W = Matrix(taxonomy.level_size(level), feature_dim, 0.0);
        for (double& x : lp.W.data) x = uniform(rng);
        lp.b = Vector(taxonomy.level_size(level), 0.0);
        p.levels.push_back(std::move(lp));
    }
    return p;
}

TrainResult train(const Dataset& dataset, const Taxonomy& taxonomy,
                  const TrainConfig& cfg, HeadMode mode) {
    check_config(cfg);
    if (dataset.empty()) throw ValidationError("train: empty dataset");
    const std::size_t n = taxonomy.num_levels();
    for (const auto& inst : dataset.instances) {
        if (inst.feature.size() != dataset.feature_dim)
            throw ValidationError("train: inconsistent feature dimensions");
        if (!taxonomy.is_consistent_path(inst.labels))
            throw ValidationError("train: inconsistent label path in training data");
    }

    const LossWeights weights = cfg.pi.empty() ? LossWeights::ones(n) : LossWeights{cfg.pi};
    if (weights.pi.size() != n)
        throw ValidationError("train: pi must have one weight per level");
    const std::vector<TransitionMatrix> transitions = taxonomy.transition_matrices();

    // Two fixed RNG streams: one for parameter init, one for the epoch
    // shuffles and dropout masks.
    HeadParameters params = init_parameters(taxonomy, dataset.feature_dim, cfg.seed);
    std::mt19937_64 loop_rng(cfg.seed + 0x9e3779b97f4a7c15ull);
    OptimizerState state = OptimizerState::zeros_like(params);

    TrainResult result;
    result.params = params;
    double best_acc = -std::numeric_limits<double>::infinity();

    auto forward_one = [&](const Vector& feature) {
        return mode == HeadMode::ttc ? forward_ttc(params, feature, transitions, cfg.tau)
                                     : forward_flat_trace(params, feature, cfg.tau);
    };

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), loop_rng);

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            std::vector<Vector> features;
            std::vector<ForwardTrace> traces;
            std::vector<std::vector<std::size_t>> labels;
            features.reserve(end - begin);
            traces.reserve(end - begin);
            labels.reserve(end - begin);
            for (std::size_t pos = begin; pos < end; ++pos) {
                const Instance& inst = dataset.instances[order[pos]];
                Vector feature = inst.feature;
                if (cfg.dropout > 0.0) {
                    // inverted dropout on the input feature
                    const double keep = 1.0 - cfg.dropout;
                    for (double& x : feature)
                        x = unit(loop_rng) < cfg.dropout ? 0.0 : x / keep;
                }
                traces.push_back(forward_one(feature));
                features.push_back(std::move(feature));
                labels.push_back(inst.labels);
            }
            const Gradients grads =
                mode == HeadMode::ttc
                    ? backward_batch(params, features, traces, labels, weights,
                                     transitions, cfg.tau, cfg.detach_chain)
                    : backward_flat_batch(params, features, traces, labels, weights,
                                          cfg.tau);
            adamw_step(params, grads, state, cfg);
        }

        // End-of-epoch metrics on the full training set, dropout disabled.
        EpochStats stats;
        stats.level_accuracy.assign(n, 0.0);
        double loss_total = 0.0;
        std::size_t exact = 0;
        for (const auto& inst : dataset.instances) {
            const ForwardTrace trace = forward_one(inst.feature);
            for (std::size_t i = 0; i < n; ++i)
                loss_total += weights.pi[i] * cross_entropy(inst.labels[i],
                                                            trace.probabilities[i]);
            const std::vector<std::size_t> pred = predict(trace);
            bool all = true;
            for (std::size_t i = 0; i < n; ++i) {
                if (pred[i] == inst.labels[i])
                    stats.level_accuracy[i] += 1.0;
                else
                    all = false;
            }
            if (all) ++exact;
        }
        const double m = static_cast<double>(dataset.size());
        stats.loss = loss_total / m;
        for (double& a : stats.level_accuracy) a /= m;
        stats.exact_match = static_cast<double>(exact) / m;
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        result.history.push_back(stats);

        if (stats.mean_level_accuracy() > best_acc) {
            best_acc = stats.mean_level_accuracy();
            result.params = params;
        }
        if (early_stop_check(result.history, cfg.early_stop_patience)) break;
    }
    return result;
}

void write_history_csv(std::ostream& out, const TrainHistory& history,
                       std::size_t num_levels) {
    out << "epoch,loss";
    for (std::size_t i = 1; i <= num_levels; ++i) out << ",acc_l" << i;
    out << ",exact_match,seconds\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        const auto& rec = history[e];
        out << (e + 1) << "," << format_double(rec.loss);
        for (double a : rec.level_accuracy) out << "," << format_double(a);
        out << "," << format_double(rec.exact_match) << ","
            << format_double(rec.seconds) << "\n";
    }
}

TrainConfig train_config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    TrainConfig cfg;
    try {
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
        cfg.dropout = j.value("dropout", cfg.dropout);
        cfg.tau = j.value("tau", cfg.tau);
        if (j.contains("pi")) cfg.pi = j["pi"].get<std::vector<double>>();
        cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
        cfg.early_stop_patience = j.value("early_stop_patience", cfg.early_stop_patience);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.detach_chain = j.value("detach_chain", cfg.detach_chain);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    check_config(cfg);
    return cfg;
}

std::string train_config_to_json(const TrainConfig& cfg) {
    nlohmann::json j;
    j["learning_rate"] = cfg.learning_rate;
    j["batch_size"] = cfg.batch_size;
    j["weight_decay"] = cfg.weight_decay;
    j["dropout"] = cfg.dropout;
    j["tau"] = cfg.tau;
    j["pi"] = cfg.pi;
    j["max_epochs"] = cfg.max_epochs;
    j["early_stop_patience"] = cfg.early_stop_patience;
    j["seed"] = cfg.seed;
    j["detach_chain"] = cfg.detach_chain;
    return j.dump();
}

} // namespace ttc
