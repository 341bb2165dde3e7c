#pragma once

#include "ttc/data.hpp"
#include "ttc/head.hpp"
#include "ttc/metrics.hpp"
#include "ttc/taxonomy.hpp"
#include "ttc/training.hpp"

namespace ttc {

// Runs the head over every instance and pairs predictions with the labels.
std::vector<PredictionRecord> predict_dataset(const HeadParameters& p,
                                              HeadMode mode, double tau,
                                              const Dataset& ds,
                                              const Taxonomy& taxonomy);

// predict_dataset + metrics in one step.
EvaluationReport evaluate_head(const HeadParameters& p, HeadMode mode, double tau,
                               const Dataset& ds, const Taxonomy& taxonomy);

} // namespace ttc
