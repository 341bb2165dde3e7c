#include "ttc/head.hpp"

#include <stdexcept>
#include <string>

namespace ttc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_shapes(const HeadParameters& p, const Vector& feature) {
    require(!p.levels.empty(), "head: no levels");
    require(feature.size() == p.feature_dim, "head: feature dimension mismatch");
    for (const auto& level : p.levels) {
        require(level.W.cols == p.feature_dim, "head: W column count != feature_dim");
        require(level.W.rows == level.b.size(), "head: W rows != b length");
        require(level.W.rows >= 1, "head: empty level");
    }
}

void check_transitions(const HeadParameters& p,
                       const std::vector<TransitionMatrix>& transitions) {
    require(transitions.size() + 1 == p.levels.size(),
            "head: need one transition matrix per adjacent level pair");
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        require(transitions[i].rows() == p.levels[i].b.size(),
                "head: transition rows mismatch");
        require(transitions[i].cols() == p.levels[i + 1].b.size(),
                "head: transition cols mismatch");
    }
}

void check_labels(const std::vector<ForwardTrace>& traces,
                  const std::vector<std::vector<std::size_t>>& labels) {
    require(!traces.empty(), "loss: empty batch");
    require(traces.size() == labels.size(), "loss: traces/labels length mismatch");
    for (std::size_t j = 0; j < traces.size(); ++j) {
        require(labels[j].size() == traces[j].num_levels(),
                "loss: label path length mismatch");
        for (std::size_t i = 0; i < labels[j].size(); ++i)
            require(labels[j][i] < traces[j].probabilities[i].size(),
                    "loss: label index out of range");
    }
}

Vector resolve_pi(const LossWeights& w, std::size_t n) {
    Vector pi = w.pi.empty() ? Vector(n, 1.0) : w.pi;
    require(pi.size() == n, "loss: pi must have one weight per level");
    bool any = false;
    for (double x : pi) {
        require(x >= 0.0, "loss: pi must be non-negative");
        if (x > 0.0) any = true;
    }
    require(any, "loss: pi must not be all zero");
    return pi;
}

Gradients zero_gradients(const HeadParameters& p) {
    Gradients g;
    g.levels.reserve(p.levels.size());
    for (const auto& level : p.levels)
        g.levels.push_back(LevelGradients{Matrix(level.W.rows, level.W.cols, 0.0),
                                          Vector(level.b.size(), 0.0)});
    return g;
}

// Accumulates dL/dz into dW (outer product with the feature) and db.
void accumulate_affine(LevelGradients& g, const Vector& dz, const Vector& feature) {
    for (std::size_t r = 0; r < dz.size(); ++r) {
        const double s = dz[r];
        if (s == 0.0) continue;
        double* row = g.dW.data.data() + r * g.dW.cols;
        for (std::size_t c = 0; c < feature.size(); ++c) row[c] += s * feature[c];
        g.db[r] += s;
    }
}

} // namespace

ForwardTrace forward_ttc(const HeadParameters& p, const Vector& feature,
                         const std::vector<TransitionMatrix>& transitions,
                         double tau) {
    check_shapes(p, feature);
    check_transitions(p, transitions);
    ForwardTrace trace;
    const std::size_t n = p.levels.size();
    trace.logits.reserve(n);
    trace.attention.reserve(n);
    trace.masked_logits.reserve(n);
    trace.probabilities.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector z = affine(p.levels[i].W, feature, p.levels[i].b);
        Vector m = (i == 0)
                       ? Vector(z.size(), 1.0)
                       : row_times_matrix(trace.probabilities[i - 1],
                                          transitions[i - 1].dense());
        Vector masked = elementwise_product(z, m);
        ProbabilityVector y = softmax_temperature(masked, tau);
        trace.logits.push_back(std::move(z));
        trace.attention.push_back(std::move(m));
        trace.masked_logits.push_back(std::move(masked));
        trace.probabilities.push_back(std::move(y));
    }
    return trace;
}

ForwardTrace forward_flat_trace(const HeadParameters& p, const Vector& feature,
                                double tau) {
    check_shapes(p, feature);
    ForwardTrace trace;
    const std::size_t n = p.levels.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vector z = affine(p.levels[i].W, feature, p.levels[i].b);
        Vector m(z.size(), 1.0);
        Vector masked = elementwise_product(z, m);
        ProbabilityVector y = softmax_temperature(masked, tau);
        trace.logits.push_back(std::move(z));
        trace.attention.push_back(std::move(m));
        trace.masked_logits.push_back(std::move(masked));
        trace.probabilities.push_back(std::move(y));
    }
    return trace;
}

std::vector<ProbabilityVector> forward_flat(const HeadParameters& p,
                                            const Vector& feature, double tau) {
    return forward_flat_trace(p, feature, tau).probabilities;
}

double loss_batch(const std::vector<ForwardTrace>& traces,
                  const std::vector<std::vector<std::size_t>>& labels,
                  const LossWeights& w) {
    check_labels(traces, labels);
    const Vector pi = resolve_pi(w, traces.front().num_levels());
    double total = 0.0;
    for (std::size_t j = 0; j < traces.size(); ++j) {
        for (std::size_t i = 0; i < pi.size(); ++i)
            total += pi[i] * cross_entropy(labels[j][i], traces[j].probabilities[i]);
    }
    return total / static_cast<double>(traces.size());
}

Gradients backward_batch(const HeadParameters& p,
                         const std::vector<Vector>& features,
                         const std::vector<ForwardTrace>& traces,
                         const std::vector<std::vector<std::size_t>>& labels,
                         const LossWeights& w,
                         const std::vector<TransitionMatrix>& transitions,
                         double tau, bool detach_chain) {
    check_labels(traces, labels);
    check_transitions(p, transitions);
    require(features.size() == traces.size(), "backward: features/traces mismatch");
    const std::size_t n = p.levels.size();
    const Vector pi = resolve_pi(w, n);
    const double batch = static_cast<double>(traces.size());

    Gradients grads = zero_gradients(p);
    for (std::size_t j = 0; j < traces.size(); ++j) {
        const ForwardTrace& trace = traces[j];
        require(trace.num_levels() == n, "backward: trace level count mismatch");
        require(features[j].size() == p.feature_dim, "backward: feature dim mismatch");

        // s[i] = dL/d(masked logits at level i), built bottom-up. The chain
        // term enters through the attention vector of the level below:
        // g = M * (z_below o s_below), then through the softmax Jacobian.
        std::vector<Vector> s(n);
        for (std::size_t ri = n; ri-- > 0;) {
            const ProbabilityVector& y = trace.probabilities[ri];
            const std::size_t k = y.size();
            Vector si(k, 0.0);
            for (std::size_t q = 0; q < k; ++q)
                si[q] = pi[ri] * (y[q] - (labels[j][ri] == q ? 1.0 : 0.0)) / tau;
            if (!detach_chain && ri + 1 < n) {
                const Vector& z_below = trace.logits[ri + 1];
                const Vector& s_below = s[ri + 1];
                const Matrix& M = transitions[ri].dense();
                Vector g(k, 0.0);
                for (std::size_t r = 0; r < M.rows; ++r) {
                    double acc = 0.0;
                    const double* row = M.data.data() + r * M.cols;
                    for (std::size_t c = 0; c < M.cols; ++c)
                        acc += row[c] * z_below[c] * s_below[c];
                    g[r] = acc;
                }
                double dot = 0.0;
                for (std::size_t q = 0; q < k; ++q) dot += y[q] * g[q];
                for (std::size_t q = 0; q < k; ++q)
                    si[q] += y[q] * (g[q] - dot) / tau;
            }
            s[ri] = std::move(si);
        }

        for (std::size_t i = 0; i < n; ++i) {
            // dL/dz = s o m
            Vector dz = elementwise_product(s[i], trace.attention[i]);
            accumulate_affine(grads.levels[i], dz, features[j]);
        }
    }

    for (auto& level : grads.levels) {
        for (double& x : level.dW.data) x /= batch;
        for (double& x : level.db) x /= batch;
    }
    return grads;
}

Gradients backward_flat_batch(const HeadParameters& p,
                              const std::vector<Vector>& features,
                              const std::vector<ForwardTrace>& traces,
                              const std::vector<std::vector<std::size_t>>& labels,
                              const LossWeights& w, double tau) {
    check_labels(traces, labels);
    require(features.size() == traces.size(), "backward: features/traces mismatch");
    const std::size_t n = p.levels.size();
    const Vector pi = resolve_pi(w, n);
    const double batch = static_cast<double>(traces.size());

    Gradients grads = zero_gradients(p);
    for (std::size_t j = 0; j < traces.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const ProbabilityVector& y = traces[j].probabilities[i];
            Vector dz(y.size());
            for (std::size_t q = 0; q < y.size(); ++q)
                dz[q] = pi[i] * (y[q] - (labels[j][i] == q ? 1.0 : 0.0)) / tau;
            accumulate_affine(grads.levels[i], dz, features[j]);
        }
    }
    for (auto& level : grads.levels) {
        for (double& x : level.dW.data) x /= batch;
        for (double& x : level.db) x /= batch;
    }
    return grads;
}

std::vector<std::size_t> predict(const ForwardTrace& trace) {
    std::vector<std::size_t> out;
    out.reserve(trace.num_levels());
    for (const auto& y : trace.probabilities) out.push_back(argmax(y));
    return out;
}

} // namespace ttc
