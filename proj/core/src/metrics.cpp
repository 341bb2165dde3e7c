#include "ttc/metrics.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ttc {

namespace {

void check_records(std::span<const PredictionRecord> records) {
    if (records.empty()) throw std::invalid_argument("metrics: empty input");
    const std::size_t n = records.front().truth.size();
    for (const auto& r : records) {
        if (r.predicted.size() != n || r.truth.size() != n)
            throw std::invalid_argument("metrics: record level count mismatch");
    }
}

} // namespace

std::pair<double, double>
hierarchical_precision_recall(std::span<const PredictionRecord> records) {
    check_records(records);
    // Per-level classes are distinct by (level, index), so each record's
    // predicted and true sets have exactly one member per level.
    std::size_t intersect = 0;
    std::size_t predicted = 0;
    std::size_t truth = 0;
    for (const auto& r : records) {
        for (std::size_t i = 0; i < r.truth.size(); ++i) {
            if (r.predicted[i] == r.truth[i]) ++intersect;
        }
        predicted += r.predicted.size();
        truth += r.truth.size();
    }
    const double hp = static_cast<double>(intersect) / static_cast<double>(predicted);
    const double hr = static_cast<double>(intersect) / static_cast<double>(truth);
    return {hp, hr};
}

double hf1_score(double hp, double hr) {
    if (hp + hr == 0.0) return 0.0;
    return 2.0 * hp * hr / (hp + hr);
}

double consistency(std::span<const PredictionRecord> records, const Taxonomy& t) {
    check_records(records);
    std::size_t consistent = 0;
    for (const auto& r : records)
        if (t.is_consistent_path(r.predicted)) ++consistent;
    return static_cast<double>(consistent) / static_cast<double>(records.size());
}

double exact_match(std::span<const PredictionRecord> records) {
    check_records(records);
    std::size_t exact = 0;
    for (const auto& r : records)
        if (r.predicted == r.truth) ++exact;
    return static_cast<double>(exact) / static_cast<double>(records.size());
}

double level_accuracy(std::span<const PredictionRecord> records, std::size_t level) {
    check_records(records);
    if (level < 1 || level > records.front().truth.size())
        throw std::out_of_range("level_accuracy: level out of range");
    std::size_t correct = 0;
    for (const auto& r : records)
        if (r.predicted[level - 1] == r.truth[level - 1]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::vector<double> cross_level_rescue(std::span<const PredictionRecord> records) {
    check_records(records);
    const std::size_t n = records.front().truth.size();
    std::vector<std::size_t> counts(n, 0);
    for (const auto& r : records) {
        for (std::size_t i = 0; i < n; ++i) {
            if (r.predicted[i] == r.truth[i]) continue;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != i && r.predicted[k] == r.truth[k]) {
                    ++counts[i];
                    break;
                }
            }
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<double>(counts[i]) / static_cast<double>(records.size());
    return out;
}

EvaluationReport evaluate(std::span<const PredictionRecord> records,
                          const Taxonomy& t) {
    check_records(records);
    EvaluationReport report;
    auto [hp, hr] = hierarchical_precision_recall(records);
    report.h_precision = hp;
    report.h_recall = hr;
    report.hf1 = hf1_score(hp, hr);
    report.consistency = consistency(records, t);
    report.exact_match = exact_match(records);
    const std::size_t n = records.front().truth.size();
    report.level_accuracy.reserve(n);
    for (std::size_t i = 1; i <= n; ++i)
        report.level_accuracy.push_back(level_accuracy(records, i));
    report.rescue = cross_level_rescue(records);
    report.instance_count = records.size();
    return report;
}

std::string report_to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["hf1"] = report.hf1;
    j["h_precision"] = report.h_precision;
    j["h_recall"] = report.h_recall;
    j["consistency"] = report.consistency;
    j["exact_match"] = report.exact_match;
    j["level_accuracy"] = report.level_accuracy;
    j["rescue"] = report.rescue;
    j["instance_count"] = report.instance_count;
    return j.dump();
}

} // namespace ttc
