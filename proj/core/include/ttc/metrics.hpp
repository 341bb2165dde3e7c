#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ttc/taxonomy.hpp"

namespace ttc {

// One evaluated instance: predicted and true class index per level.
struct PredictionRecord {
    std::vector<std::size_t> predicted;
    std::vector<std::size_t> truth;
};

struct EvaluationReport {
    double hf1 = 0.0;
    double h_precision = 0.0;
    double h_recall = 0.0;
    double consistency = 0.0;
    double exact_match = 0.0;
    std::vector<double> level_accuracy;
    std::vector<double> rescue;
    std::size_t instance_count = 0;
};

// Micro-averaged hierarchical precision/recall over the per-level predicted
// and true class sets. With one prediction per level both denominators are
// n * |records| and the two values coincide.
std::pair<double, double>
hierarchical_precision_recall(std::span<const PredictionRecord> records);

// Harmonic mean; 0 when hp + hr == 0.
double hf1_score(double hp, double hr);

// Fraction of records whose predicted path is a valid parent-child chain.
double consistency(std::span<const PredictionRecord> records, const Taxonomy& t);

// Fraction of records correct at every level.
double exact_match(std::span<const PredictionRecord> records);

// Fraction of records correct at the given (1-based) level.
double level_accuracy(std::span<const PredictionRecord> records, std::size_t level);

// Per level: the fraction of all records wrong at that level but correct at
// at least one other level.
std::vector<double> cross_level_rescue(std::span<const PredictionRecord> records);

// All of the above in one report.
EvaluationReport evaluate(std::span<const PredictionRecord> records,
                          const Taxonomy& t);

// JSON document with exactly the report's field names.
std::string report_to_json(const EvaluationReport& report);

} // namespace ttc
