#include "ttc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttc/errors.hpp"

namespace ttc {

namespace {

using json = nlohmann::json;

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
    throw ValidationError("line " + std::to_string(line) + ": " + what);
}

void check_spec(const SyntheticSpec& spec, std::size_t num_levels) {
    if (spec.feature_dim < 1)
        throw ValidationError("synthetic spec: feature_dim must be >= 1");
    if (spec.radii.size() != num_levels)
        throw ValidationError("synthetic spec: need one radius per taxonomy level");
    for (std::size_t i = 0; i < spec.radii.size(); ++i) {
        if (!(spec.radii[i] > 0.0))
            throw ValidationError("synthetic spec: radii must be positive");
        if (i > 0 && !(spec.radii[i] < spec.radii[i - 1]))
            throw ValidationError("synthetic spec: radii must be strictly decreasing");
    }
    if (spec.noise_sigma < 0.0)
        throw ValidationError("synthetic spec: noise_sigma must be >= 0");
    if (spec.instances_per_leaf < 1)
        throw ValidationError("synthetic spec: instances_per_leaf must be >= 1");
}

} // namespace

Dataset load_jsonl(const std::filesystem::path& path, const Taxonomy& t) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read dataset file: " + path.string());

    Dataset ds;
    ds.taxonomy_hash = t.sha256();
    const std::size_t n = t.num_levels();

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            line_error(lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("feature") || !j.contains("labels"))
            line_error(lineno, "expected an object with 'feature' and 'labels'");
        if (!j["feature"].is_array() || !j["labels"].is_array())
            line_error(lineno, "'feature' and 'labels' must be arrays");

        Instance inst;
        for (const auto& v : j["feature"]) {
            if (!v.is_number()) line_error(lineno, "feature entries must be numbers");
            const double x = v.get<double>();
            if (!std::isfinite(x)) line_error(lineno, "feature entries must be finite");
            inst.feature.push_back(x);
        }
        if (ds.instances.empty()) {
            if (inst.feature.empty()) line_error(lineno, "empty feature vector");
            ds.feature_dim = inst.feature.size();
        } else if (inst.feature.size() != ds.feature_dim) {
            line_error(lineno, "feature dimension " + std::to_string(inst.feature.size()) +
                                   ", expected " + std::to_string(ds.feature_dim));
        }

        if (j["labels"].size() != n)
            line_error(lineno, "expected " + std::to_string(n) + " labels, got " +
                                   std::to_string(j["labels"].size()));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = j["labels"][i];
            if (!v.is_string()) line_error(lineno, "labels must be strings");
            const auto id = t.find(i + 1, v.get<std::string>());
            if (!id)
                line_error(lineno, "unknown label '" + v.get<std::string>() +
                                       "' at level " + std::to_string(i + 1));
            inst.labels.push_back(id->index);
        }
        if (!t.is_consistent_path(inst.labels))
            line_error(lineno, "inconsistent label path");

        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

void write_jsonl(std::ostream& out, const Dataset& ds, const Taxonomy& t) {
    for (const auto& inst : ds.instances) {
        json j;
        j["feature"] = inst.feature;
        json labels = json::array();
        for (std::size_t i = 0; i < inst.labels.size(); ++i)
            labels.push_back(t.class_name(ClassId{i + 1, inst.labels[i]}));
        j["labels"] = labels;
        out << j.dump() << "\n";
    }
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("split: train fraction must be in (0, 1)");
    const std::size_t m = ds.size();
    const auto train_count =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(m)));
    if (train_count == 0 || train_count == m)
        throw ValidationError("split: both sides must be non-empty");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    Dataset train{{}, ds.feature_dim, ds.taxonomy_hash};
    Dataset test{{}, ds.feature_dim, ds.taxonomy_hash};
    train.instances.reserve(train_count);
    test.instances.reserve(m - train_count);
    for (std::size_t i = 0; i < m; ++i) {
        (i < train_count ? train : test).instances.push_back(ds.instances[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

Dataset generate_synthetic(const Taxonomy& t, const SyntheticSpec& spec,
                           std::uint64_t seed) {
    check_spec(spec, t.num_levels());
    const std::size_t d = spec.feature_dim;
    const std::size_t n = t.num_levels();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Centers drawn level by level in index order: roots uniform in
    // [-r1, r1]^d, each child its parent's center plus a uniform offset in
    // [-r_level, r_level]^d.
    std::vector<std::vector<Vector>> centers(n);
    for (std::size_t li = 0; li < n; ++li) {
        const double r = spec.radii[li];
        std::uniform_real_distribution<double> box(-r, r);
        centers[li].resize(t.level_size(li + 1));
        for (std::size_t idx = 0; idx < centers[li].size(); ++idx) {
            Vector c(d);
            for (double& x : c) x = box(rng);
            if (li > 0) {
                const ClassId parent = t.parent(ClassId{li + 1, idx});
                const Vector& pc = centers[li - 1][parent.index];
                for (std::size_t k = 0; k < d; ++k) c[k] += pc[k];
            }
            centers[li][idx] = std::move(c);
        }
    }

    Dataset ds;
    ds.feature_dim = d;
    ds.taxonomy_hash = t.sha256();
    const std::size_t leaves = t.level_size(n);
    ds.instances.reserve(leaves * spec.instances_per_leaf);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        const ClassId leaf_id{n, leaf};
        std::vector<std::size_t> labels;
        for (ClassId a : t.ancestor_closure(leaf_id)) labels.push_back(a.index);
        labels.push_back(leaf);
        for (std::size_t rep = 0; rep < spec.instances_per_leaf; ++rep) {
            Instance inst;
            inst.feature = centers[n - 1][leaf];
            for (double& x : inst.feature) x += spec.noise_sigma * gauss(rng);
            inst.labels = labels;
            ds.instances.push_back(std::move(inst));
        }
    }
    return ds;
}

std::pair<Dataset, FeatureStats> normalize_features(const Dataset& ds) {
    if (ds.empty()) throw ValidationError("normalize: empty dataset");
    const std::size_t d = ds.feature_dim;
    const double m = static_cast<double>(ds.size());

    FeatureStats stats{Vector(d, 0.0), Vector(d, 0.0)};
    for (const auto& inst : ds.instances)
        for (std::size_t k = 0; k < d; ++k) stats.mean[k] += inst.feature[k];
    for (double& x : stats.mean) x /= m;
    for (const auto& inst : ds.instances)
        for (std::size_t k = 0; k < d; ++k) {
            const double delta = inst.feature[k] - stats.mean[k];
            stats.stddev[k] += delta * delta;
        }
    for (double& x : stats.stddev) x = std::sqrt(x / m);

    return {apply_normalization(ds, stats), stats};
}

Dataset apply_normalization(const Dataset& ds, const FeatureStats& stats) {
    if (stats.mean.size() != ds.feature_dim || stats.stddev.size() != ds.feature_dim)
        throw ValidationError("normalize: stats dimension mismatch");
    Dataset out = ds;
    for (auto& inst : out.instances) {
        for (std::size_t k = 0; k < ds.feature_dim; ++k) {
            const double scale = stats.stddev[k] < 1e-12 ? 1.0 : stats.stddev[k];
            inst.feature[k] = (inst.feature[k] - stats.mean[k]) / scale;
        }
    }
    return out;
}

SyntheticSpec synthetic_spec_from_json(const std::string& json_text,
                                       std::size_t num_levels) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synthetic spec: malformed JSON: ") + e.what());
    }
    SyntheticSpec spec;
    try {
        spec.feature_dim = j.at("feature_dim").get<std::size_t>();
        spec.radii = j.at("radii").get<std::vector<double>>();
        spec.noise_sigma = j.value("noise_sigma", 0.0);
        spec.instances_per_leaf = j.value("instances_per_leaf", std::size_t{1});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synthetic spec: ") + e.what());
    }
    check_spec(spec, num_levels);
    return spec;
}

SyntheticSpec load_synthetic_spec_file(const std::filesystem::path& path,
                                       std::size_t num_levels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read synthetic spec file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return synthetic_spec_from_json(buf.str(), num_levels);
}

} // namespace ttc
