#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ttc/numeric.hpp"

namespace ttc {

// Identifies a class by position: 1-based level, 0-based index within the level.
struct ClassId {
    std::size_t level = 0;
    std::size_t index = 0;

    bool operator==(const ClassId&) const = default;
};

struct ValidationResult {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

// Binary matrix linking two adjacent levels: entry (k, j) is 1 iff class j of
// the lower level is a child of class k of the upper level. For a valid tree
// every column holds exactly one 1.
class TransitionMatrix {
public:
    TransitionMatrix(Matrix dense, std::vector<std::size_t> parent_of);

    std::size_t rows() const { return dense_.rows; }
    std::size_t cols() const { return dense_.cols; }
    double operator()(std::size_t r, std::size_t c) const { return dense_(r, c); }

    // Row index of the single 1 in column `child`.
    std::size_t parent_of(std::size_t child) const { return parent_[child]; }

    const Matrix& dense() const { return dense_; }

private:
    Matrix dense_;
    std::vector<std::size_t> parent_;
};

// An n-level class tree (n >= 2) linked by child -> parent edges.
//
// Construction does not validate the tree axioms; validate() reports every
// violation so that malformed structures can be inspected. Accessors that
// presuppose a tree (parent, ancestor_closure, transition_matrix,
// is_consistent_path) must only be called on taxonomies that validate.
class Taxonomy {
public:
    // levels: class names per level, document order preserved.
    // parent_edges: (child, parent) pairs; edge endpoints must exist.
    Taxonomy(std::vector<std::vector<std::string>> levels,
             std::vector<std::pair<ClassId, ClassId>> parent_edges);

    std::size_t num_levels() const { return levels_.size(); }
    std::size_t level_size(std::size_t level) const;
    std::size_t num_classes() const;

    const std::vector<std::string>& level_names(std::size_t level) const;
    const std::string& class_name(ClassId c) const;
    std::optional<ClassId> find(std::size_t level, std::string_view name) const;

    // All parents recorded for c (empty for roots, exactly one in a valid tree).
    const std::vector<ClassId>& parents_of(ClassId c) const;

    // The unique parent of c; throws if c is at level 1 or has != 1 parent.
    ClassId parent(ClassId c) const;

    // Checks every axiom: level partition (>= 2 non-empty levels, unique names),
    // roots without parents, exactly one parent per non-root, parents exactly
    // one level up, and a cycle scan over the raw edges.
    ValidationResult validate() const;

    // Ancestors of c from level 1 down to c's direct parent.
    std::vector<ClassId> ancestor_closure(ClassId c) const;

    // True iff the path (one class per level 1..n, in order) follows
    // parent-child edges at every step.
    bool is_consistent_path(const std::vector<ClassId>& path) const;
    // Same, with entry i interpreted as the class index at level i+1.
    bool is_consistent_path(const std::vector<std::size_t>& path_indices) const;

    // Transition matrix between `level` and `level + 1`; 1 <= level <= n-1.
    TransitionMatrix transition_matrix(std::size_t level) const;
    // All n-1 matrices in level order.
    std::vector<TransitionMatrix> transition_matrices() const;

    // Canonical JSON document:
    //   {"levels": [[name, ...], ...], "parents": {"<level>/<child>": "<parent>"}}
    std::string serialize() const;

    // SHA-256 hex digest of serialize(); binds datasets and checkpoints to
    // the taxonomy independent of source formatting.
    std::string sha256() const;

    // Parses and fully validates the JSON schema above. Throws ValidationError
    // with the first problem found (malformed document, duplicate or empty
    // name, unknown or wrong-level parent, missing parent, empty level).
    static Taxonomy parse(const std::string& json_text);

    bool operator==(const Taxonomy&) const = default;

private:
    void require_exists(ClassId c) const;

    std::vector<std::vector<std::string>> levels_;
    // parents_[level-1][index] -> recorded parent ids (raw, possibly invalid)
    std::vector<std::vector<std::vector<ClassId>>> parents_;
};

// Reads and parses a taxonomy file. Throws IoError if unreadable.
Taxonomy load_taxonomy_file(const std::filesystem::path& path);

} // namespace ttc
