#include "ttc/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttc/errors.hpp"

namespace ttc {

namespace {

using json = nlohmann::json;

void check_finite(const HeadParameters& p) {
    for (const auto& level : p.levels) {
        for (double x : level.W.data)
            if (!std::isfinite(x)) throw ValidationError("checkpoint: non-finite weight");
        for (double x : level.b)
            if (!std::isfinite(x)) throw ValidationError("checkpoint: non-finite bias");
    }
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    json doc;
    doc["feature_dim"] = ckpt.params.feature_dim;
    json levels = json::array();
    for (const auto& level : ckpt.params.levels) {
        json l;
        l["W"] = level.W.data;
        l["b"] = level.b;
        levels.push_back(std::move(l));
    }
    doc["levels"] = levels;
    doc["tau"] = ckpt.tau;
    doc["taxonomy_hash"] = ckpt.taxonomy_hash;
    doc["mode"] = to_string(ckpt.mode);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint file: " + path.string());
    out << doc.dump() << "\n";
    if (!out) throw IoError("failed writing checkpoint file: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();

    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint: malformed JSON: ") + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.params.feature_dim = doc.at("feature_dim").get<std::size_t>();
        for (const auto& l : doc.at("levels")) {
            LevelParameters level;
            level.b = l.at("b").get<Vector>();
            const auto w = l.at("W").get<std::vector<double>>();
            if (level.b.empty() || w.size() % level.b.size() != 0 ||
                w.size() / level.b.size() != ckpt.params.feature_dim)
                throw ValidationError("checkpoint: W shape does not match b and feature_dim");
            level.W = Matrix(level.b.size(), ckpt.params.feature_dim);
            level.W.data = w;
            ckpt.params.levels.push_back(std::move(level));
        }
        ckpt.tau = doc.at("tau").get<double>();
        ckpt.taxonomy_hash = doc.at("taxonomy_hash").get<std::string>();
        ckpt.mode = head_mode_from_string(doc.value("mode", "ttc"));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint: ") + e.what());
    }
    if (ckpt.params.levels.empty())
        throw ValidationError("checkpoint: no levels");
    if (!(ckpt.tau > 0.0)) throw ValidationError("checkpoint: tau must be > 0");
    check_finite(ckpt.params);
    return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const Taxonomy& t) {
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.taxonomy_hash != t.sha256())
        throw MismatchError("taxonomy/checkpoint mismatch: hash " + ckpt.taxonomy_hash +
                            " does not match the given taxonomy");
    if (ckpt.params.levels.size() != t.num_levels())
        throw MismatchError("taxonomy/checkpoint mismatch: level count");
    for (std::size_t i = 0; i < t.num_levels(); ++i)
        if (ckpt.params.levels[i].b.size() != t.level_size(i + 1))
            throw MismatchError("taxonomy/checkpoint mismatch: level " +
                                std::to_string(i + 1) + " size");
    return ckpt;
}

} // namespace ttc
