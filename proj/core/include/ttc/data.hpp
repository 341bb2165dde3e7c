#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ttc/numeric.hpp"
#include "ttc/taxonomy.hpp"

namespace ttc {

// A feature vector plus one class index per level, forming a consistent
// root-to-leaf path.
struct Instance {
    Vector feature;
    std::vector<std::size_t> labels;
};

struct Dataset {
    std::vector<Instance> instances;
    std::size_t feature_dim = 0;
    std::string taxonomy_hash;

    std::size_t size() const { return instances.size(); }
    bool empty() const { return instances.empty(); }
};

// Hierarchical Gaussian-cluster generator: class centers nest with strictly
// shrinking dispersion radii so upper levels separate more easily than lower
// ones.
struct SyntheticSpec {
    std::size_t feature_dim = 0;
    std::vector<double> radii; // one per level, strictly decreasing, all > 0
    double noise_sigma = 0.0;
    std::size_t instances_per_leaf = 1;
};

struct FeatureStats {
    Vector mean;
    Vector stddev; // raw per-dimension standard deviation (population)
};

// Reads JSONL lines {"feature": [...], "labels": ["l1", ..., "ln"]}.
// Label names are resolved against the taxonomy and every path is checked for
// consistency; errors carry the 1-based line number.
Dataset load_jsonl(const std::filesystem::path& path, const Taxonomy& t);

// Writes the dataset in the same JSONL schema (labels as names).
void write_jsonl(std::ostream& out, const Dataset& ds, const Taxonomy& t);

// Seeded permutation split: first floor(train_fraction * m) to train, rest to
// test. Throws if either side would be empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

Dataset generate_synthetic(const Taxonomy& t, const SyntheticSpec& spec,
                           std::uint64_t seed);

// Shifts/scales each dimension to mean 0, sd 1 (population moments).
// Dimensions with sd < 1e-12 are centered only. Reuse the returned stats on
// held-out data via apply_normalization.
std::pair<Dataset, FeatureStats> normalize_features(const Dataset& ds);

Dataset apply_normalization(const Dataset& ds, const FeatureStats& stats);

// Parses {"feature_dim": d, "radii": [...], "noise_sigma": s,
// "instances_per_leaf": k} and checks the spec invariants.
SyntheticSpec synthetic_spec_from_json(const std::string& json_text,
                                       std::size_t num_levels);

SyntheticSpec load_synthetic_spec_file(const std::filesystem::path& path,
                                       std::size_t num_levels);

} // namespace ttc
