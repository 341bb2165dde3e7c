#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ttc/data.hpp"
#include "ttc/head.hpp"
#include "ttc/taxonomy.hpp"

namespace ttc {

enum class HeadMode { ttc, flat };

const char* to_string(HeadMode mode);
HeadMode head_mode_from_string(const std::string& s);

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 32;
    double weight_decay = 0.01;
    double dropout = 0.0; // applied to the input feature during training only
    double tau = 1.0;
    std::vector<double> pi; // empty means all ones
    std::size_t max_epochs = 100;
    std::size_t early_stop_patience = 3;
    std::uint64_t seed = 42;
    bool detach_chain = false;
};

// AdamW moment accumulators, one slot per level mirroring HeadParameters.
struct OptimizerState {
    struct Slot {
        Matrix m_W, v_W;
        Vector m_b, v_b;
    };
    std::vector<Slot> levels;
    std::size_t step = 0;

    static OptimizerState zeros_like(const HeadParameters& p);
};

struct EpochStats {
    double loss = 0.0;
    std::vector<double> level_accuracy;
    double exact_match = 0.0;
    double seconds = 0.0; // wall clock, the one non-deterministic field

    double mean_level_accuracy() const;
};

using TrainHistory = std::vector<EpochStats>;

struct TrainResult {
    HeadParameters params; // snapshot with the best mean train accuracy
    TrainHistory history;
};

// One decoupled-weight-decay Adam update (beta1 0.9, beta2 0.999, eps 1e-8):
// bias-corrected moment step plus p -= lr * wd * p.
void adamw_step(HeadParameters& p, const Gradients& g, OptimizerState& s,
                const TrainConfig& cfg);

// True iff the mean per-level train accuracy has not exceeded its running
// best for `patience` consecutive epochs.
bool early_stop_check(const TrainHistory& history, std::size_t patience);

// Deterministic mini-batch training of the chosen head over fixed features.
// Epochs shuffle with a seeded permutation; stops at max_epochs or early stop.
TrainResult train(const Dataset& dataset, const Taxonomy& taxonomy,
                  const TrainConfig& cfg, HeadMode mode);

// Seeded initialization: W uniform in [-sqrt(1/d), sqrt(1/d)], b zero.
HeadParameters init_parameters(const Taxonomy& taxonomy, std::size_t feature_dim,
                               std::uint64_t seed);

// CSV: epoch,loss,acc_l1,...,acc_ln,exact_match,seconds
void write_history_csv(std::ostream& out, const TrainHistory& history,
                       std::size_t num_levels);

// JSON config mirroring the TrainConfig field names; absent fields keep
// their defaults.
TrainConfig train_config_from_json(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& cfg);

} // namespace ttc
