#pragma once

#include <filesystem>
#include <string>

#include "ttc/head.hpp"
#include "ttc/taxonomy.hpp"
#include "ttc/training.hpp"

namespace ttc {

// On-disk head snapshot:
//   {"feature_dim": d, "levels": [{"W": [row-major], "b": [...]}, ...],
//    "tau": t, "taxonomy_hash": "<sha256 hex>", "mode": "ttc"|"flat"}
struct Checkpoint {
    HeadParameters params;
    double tau = 1.0;
    std::string taxonomy_hash;
    HeadMode mode = HeadMode::ttc;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Parses and checks shapes/finiteness. Does not check the taxonomy binding.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Same, then verifies the stored hash and level sizes against the taxonomy;
// throws MismatchError when they disagree.
Checkpoint load_checkpoint(const std::filesystem::path& path, const Taxonomy& t);

} // namespace ttc
