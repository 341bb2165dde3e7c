#include "ttc/evaluate.hpp"

#include "ttc/errors.hpp"

namespace ttc {

std::vector<PredictionRecord> predict_dataset(const HeadParameters& p,
                                              HeadMode mode, double tau,
                                              const Dataset& ds,
                                              const Taxonomy& taxonomy) {
    if (ds.empty()) throw ValidationError("evaluate: empty dataset");
    const std::vector<TransitionMatrix> transitions =
        mode == HeadMode::ttc ? taxonomy.transition_matrices()
                              : std::vector<TransitionMatrix>{};
    std::vector<PredictionRecord> records;
    records.reserve(ds.size());
    for (const auto& inst : ds.instances) {
        const ForwardTrace trace =
            mode == HeadMode::ttc ? forward_ttc(p, inst.feature, transitions, tau)
                                  : forward_flat_trace(p, inst.feature, tau);
        records.push_back(PredictionRecord{predict(trace), inst.labels});
    }
    return records;
}

EvaluationReport evaluate_head(const HeadParameters& p, HeadMode mode, double tau,
                               const Dataset& ds, const Taxonomy& taxonomy) {
    const auto records = predict_dataset(p, mode, tau, ds, taxonomy);
    return evaluate(records, taxonomy);
}

} // namespace ttc
