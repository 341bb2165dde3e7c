#pragma once

// Shared fixtures and independent reference implementations ("oracles") used
// by the test binaries. The oracles deliberately recompute results with plain
// loops and parent lookups so they do not share code paths with the library.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ttc/data.hpp"
#include "ttc/head.hpp"
#include "ttc/taxonomy.hpp"

namespace tutil {

// Two-level fixture matching the classic jewel/fruit example:
// {Jewel, Fruit} over {K gold, Pearl, Apple, Pear}.
inline ttc::Taxonomy worked_taxonomy() {
    return ttc::Taxonomy(
        {{"Jewel", "Fruit"}, {"K gold", "Pearl", "Apple", "Pear"}},
        {{{2, 0}, {1, 0}}, {{2, 1}, {1, 0}}, {{2, 2}, {1, 1}}, {{2, 3}, {1, 1}}});
}

// Three-level fixture: {Food, Valuables} / {Jewel, Fruit} / four leaves.
// The jewel subtree hangs under its own root.
inline ttc::Taxonomy fig_taxonomy() {
    return ttc::Taxonomy(
        {{"Food", "Valuables"},
         {"Jewel", "Fruit"},
         {"K gold", "Pearl", "Apple", "Pear"}},
        {{{2, 0}, {1, 1}},
         {{2, 1}, {1, 0}},
         {{3, 0}, {2, 0}},
         {{3, 1}, {2, 0}},
         {{3, 2}, {2, 1}},
         {{3, 3}, {2, 1}}});
}

inline std::string fig_taxonomy_json() {
    return R"({"levels": [["Food", "Valuables"], ["Jewel", "Fruit"],
                          ["K gold", "Pearl", "Apple", "Pear"]],
               "parents": {"2/Jewel": "Valuables", "2/Fruit": "Food",
                           "3/K gold": "Jewel", "3/Pearl": "Jewel",
                           "3/Apple": "Fruit", "3/Pear": "Fruit"}})";
}

// Random tree with the given level sizes; every non-root class draws a
// uniform parent one level up.
inline ttc::Taxonomy random_taxonomy(std::mt19937_64& rng,
                                     const std::vector<std::size_t>& sizes) {
    std::vector<std::vector<std::string>> levels;
    for (std::size_t li = 0; li < sizes.size(); ++li) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < sizes[li]; ++i)
            names.push_back("c" + std::to_string(li + 1) + "_" + std::to_string(i));
        levels.push_back(std::move(names));
    }
    std::vector<std::pair<ttc::ClassId, ttc::ClassId>> edges;
    for (std::size_t li = 1; li < sizes.size(); ++li) {
        std::uniform_int_distribution<std::size_t> pick(0, sizes[li - 1] - 1);
        for (std::size_t i = 0; i < sizes[li]; ++i)
            edges.push_back({{li + 1, i}, {li, pick(rng)}});
    }
    return ttc::Taxonomy(std::move(levels), std::move(edges));
}

inline ttc::Vector random_vector(std::mt19937_64& rng, std::size_t d,
                                 double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    ttc::Vector v(d);
    for (double& x : v) x = u(rng);
    return v;
}

inline ttc::HeadParameters random_params(std::mt19937_64& rng, const ttc::Taxonomy& t,
                                         std::size_t d, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    ttc::HeadParameters p;
    p.feature_dim = d;
    for (std::size_t level = 1; level <= t.num_levels(); ++level) {
        ttc::LevelParameters lp;
        lp.W = ttc::Matrix(t.level_size(level), d);
        for (double& x : lp.W.data) x = u(rng);
        lp.b = random_vector(rng, t.level_size(level), scale);
        p.levels.push_back(std::move(lp));
    }
    return p;
}

// Uniform random leaf, expanded to its full consistent label path.
inline std::vector<std::size_t> random_path(std::mt19937_64& rng,
                                            const ttc::Taxonomy& t) {
    const std::size_t n = t.num_levels();
    std::uniform_int_distribution<std::size_t> pick(0, t.level_size(n) - 1);
    const ttc::ClassId leaf{n, pick(rng)};
    std::vector<std::size_t> path;
    for (ttc::ClassId a : t.ancestor_closure(leaf)) path.push_back(a.index);
    path.push_back(leaf.index);
    return path;
}

// ---- oracle-side forward/loss, plain loops and parent lookups ----

struct PlainTrace {
    std::vector<std::vector<double>> z, m, u, y;
};

inline std::vector<double> plain_softmax(const std::vector<double>& u, double tau) {
    std::vector<double> e(u.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        e[i] = std::exp(u[i] / tau);
        sum += e[i];
    }
    for (double& x : e) x /= sum;
    return e;
}

inline PlainTrace plain_forward(const ttc::HeadParameters& p, const ttc::Vector& a,
                                const ttc::Taxonomy& t, double tau,
                                const std::vector<std::vector<double>>* fixed_masks =
                                    nullptr) {
    PlainTrace trace;
    const std::size_t n = p.levels.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& W = p.levels[i].W;
        std::vector<double> z(W.rows, 0.0);
        for (std::size_t r = 0; r < W.rows; ++r) {
            for (std::size_t c = 0; c < W.cols; ++c) z[r] += W(r, c) * a[c];
            z[r] += p.levels[i].b[r];
        }
        std::vector<double> m(z.size(), 1.0);
        if (fixed_masks) {
            m = (*fixed_masks)[i];
        } else if (i > 0) {
            for (std::size_t j = 0; j < m.size(); ++j) {
                const ttc::ClassId parent = t.parent(ttc::ClassId{i + 1, j});
                m[j] = trace.y[i - 1][parent.index];
            }
        }
        std::vector<double> u(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) u[j] = z[j] * m[j];
        trace.z.push_back(std::move(z));
        trace.m.push_back(std::move(m));
        trace.y.push_back(plain_softmax(u, tau));
        trace.u.push_back(std::move(u));
    }
    return trace;
}

inline double plain_instance_loss(const PlainTrace& trace,
                                  const std::vector<std::size_t>& labels,
                                  const std::vector<double>& pi) {
    double loss = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        loss += pi[i] * -std::log(trace.y[i][labels[i]]);
    return loss;
}

// Central finite differences of `loss(params)` over every W/b entry.
template <typename LossFn>
inline ttc::Gradients fd_gradients(ttc::HeadParameters params, LossFn&& loss,
                                   double h = 1e-6) {
    ttc::Gradients g;
    for (auto& level : params.levels)
        g.levels.push_back(ttc::LevelGradients{
            ttc::Matrix(level.W.rows, level.W.cols, 0.0),
            ttc::Vector(level.b.size(), 0.0)});
    auto probe = [&](double* slot, double* out) {
        const double saved = *slot;
        *slot = saved + h;
        const double up = loss(params);
        *slot = saved - h;
        const double down = loss(params);
        *slot = saved;
        *out = (up - down) / (2.0 * h);
    };
    for (std::size_t i = 0; i < params.levels.size(); ++i) {
        auto& level = params.levels[i];
        for (std::size_t k = 0; k < level.W.data.size(); ++k)
            probe(&level.W.data[k], &g.levels[i].dW.data[k]);
        for (std::size_t k = 0; k < level.b.size(); ++k)
            probe(&level.b[k], &g.levels[i].db[k]);
    }
    return g;
}

// Standard gradient-check error: |a - n| scaled by max(1, |a|, |n|).
inline double grad_rel_error(double analytic, double numeric) {
    const double denom =
        std::max(1.0, std::max(std::abs(analytic), std::abs(numeric)));
    return std::abs(analytic - numeric) / denom;
}

// ---- filesystem helpers ----

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ttc_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace tutil
