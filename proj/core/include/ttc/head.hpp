#pragma once

#include <cstddef>
#include <vector>

#include "ttc/numeric.hpp"
#include "ttc/taxonomy.hpp"

namespace ttc {

// One affine classifier per taxonomy level over a shared feature vector.
struct LevelParameters {
    Matrix W; // level_size x feature_dim
    Vector b; // level_size
};

struct HeadParameters {
    std::size_t feature_dim = 0;
    std::vector<LevelParameters> levels;

    std::size_t num_levels() const { return levels.size(); }
};

// Per-level importance factors of the hierarchical loss.
struct LossWeights {
    std::vector<double> pi;

    static LossWeights ones(std::size_t n) { return LossWeights{Vector(n, 1.0)}; }
};

// Everything one forward pass produces, kept for backprop and prediction.
// Level 1 has an all-ones attention vector so every level shares the same
// masked-logits path.
struct ForwardTrace {
    std::vector<Vector> logits;               // z per level
    std::vector<Vector> attention;            // m per level
    std::vector<Vector> masked_logits;        // z o m per level
    std::vector<ProbabilityVector> probabilities; // y-hat per level

    std::size_t num_levels() const { return probabilities.size(); }
};

struct LevelGradients {
    Matrix dW;
    Vector db;
};

struct Gradients {
    std::vector<LevelGradients> levels;
};

// Chained forward pass: level 1 is a temperature softmax of its logits; each
// deeper level's logits are gated elementwise by the parent probabilities
// pushed through the transition matrix before its own softmax.
ForwardTrace forward_ttc(const HeadParameters& p, const Vector& feature,
                         const std::vector<TransitionMatrix>& transitions,
                         double tau);

// Independent per-level softmax heads, no cross-level information.
std::vector<ProbabilityVector> forward_flat(const HeadParameters& p,
                                            const Vector& feature, double tau);

// Flat forward keeping the full trace (attention all-ones at every level).
ForwardTrace forward_flat_trace(const HeadParameters& p, const Vector& feature,
                                double tau);

// Mean over the batch of the pi-weighted sum of per-level cross-entropies.
double loss_batch(const std::vector<ForwardTrace>& traces,
                  const std::vector<std::vector<std::size_t>>& labels,
                  const LossWeights& w);

// Exact gradients of loss_batch with respect to every W and b.
// With detach_chain the parent probabilities inside each attention vector are
// treated as constants; otherwise gradients flow through the whole chain.
Gradients backward_batch(const HeadParameters& p,
                         const std::vector<Vector>& features,
                         const std::vector<ForwardTrace>& traces,
                         const std::vector<std::vector<std::size_t>>& labels,
                         const LossWeights& w,
                         const std::vector<TransitionMatrix>& transitions,
                         double tau, bool detach_chain);

// Gradients for the flat head (traces from forward_flat_trace).
Gradients backward_flat_batch(const HeadParameters& p,
                              const std::vector<Vector>& features,
                              const std::vector<ForwardTrace>& traces,
                              const std::vector<std::vector<std::size_t>>& labels,
                              const LossWeights& w, double tau);

// Per-level argmax indices, ties broken by lowest index.
std::vector<std::size_t> predict(const ForwardTrace& trace);

} // namespace ttc
