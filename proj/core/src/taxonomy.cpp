#include "ttc/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ttc/errors.hpp"

namespace ttc {

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string describe(const Taxonomy& t, ClassId c) {
    std::ostringstream os;
    os << "'" << t.class_name(c) << "' (level " << c.level << ")";
    return os.str();
}

} // namespace

TransitionMatrix::TransitionMatrix(Matrix dense, std::vector<std::size_t> parent_of)
    : dense_(std::move(dense)), parent_(std::move(parent_of)) {
    if (parent_.size() != dense_.cols)
        throw std::invalid_argument("TransitionMatrix: parent list does not match columns");
}

Taxonomy::Taxonomy(std::vector<std::vector<std::string>> levels,
                   std::vector<std::pair<ClassId, ClassId>> parent_edges)
    : levels_(std::move(levels)) {
    parents_.resize(levels_.size());
    for (std::size_t li = 0; li < levels_.size(); ++li)
        parents_[li].resize(levels_[li].size());
    for (const auto& [child, parent] : parent_edges) {
        require_exists(child);
        require_exists(parent);
        parents_[child.level - 1][child.index].push_back(parent);
    }
}

void Taxonomy::require_exists(ClassId c) const {
    if (c.level < 1 || c.level > levels_.size() || c.index >= levels_[c.level - 1].size())
        throw std::invalid_argument("taxonomy: class id out of range");
}

std::size_t Taxonomy::level_size(std::size_t level) const {
    if (level < 1 || level > levels_.size())
        throw std::out_of_range("taxonomy: level out of range");
    return levels_[level - 1].size();
}

std::size_t Taxonomy::num_classes() const {
    std::size_t n = 0;
    for (const auto& l : levels_) n += l.size();
    return n;
}

const std::vector<std::string>& Taxonomy::level_names(std::size_t level) const {
    if (level < 1 || level > levels_.size())
        throw std::out_of_range("taxonomy: level out of range");
    return levels_[level - 1];
}

const std::string& Taxonomy::class_name(ClassId c) const {
    require_exists(c);
    return levels_[c.level - 1][c.index];
}

std::optional<ClassId> Taxonomy::find(std::size_t level, std::string_view name) const {
    if (level < 1 || level > levels_.size()) return std::nullopt;
    const auto& names = levels_[level - 1];
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return ClassId{level, i};
    return std::nullopt;
}

const std::vector<ClassId>& Taxonomy::parents_of(ClassId c) const {
    require_exists(c);
    return parents_[c.level - 1][c.index];
}

ClassId Taxonomy::parent(ClassId c) const {
    const auto& ps = parents_of(c);
    if (c.level == 1 || ps.size() != 1)
        throw std::logic_error("taxonomy: class has no unique parent");
    return ps.front();
}

ValidationResult Taxonomy::validate() const {
    ValidationResult result;
    auto violation = [&](const std::string& text) { result.violations.push_back(text); };

    if (levels_.size() < 2)
        violation("level partition: taxonomy must have at least 2 levels");
    for (std::size_t li = 0; li < levels_.size(); ++li) {
        if (levels_[li].empty()) {
            violation("level partition: level " + std::to_string(li + 1) + " is empty");
            continue;
        }
        std::unordered_set<std::string> seen;
        for (const auto& name : levels_[li]) {
            if (name.empty())
                violation("level partition: empty class name at level " + std::to_string(li + 1));
            if (!seen.insert(name).second)
                violation("level partition: duplicate class name '" + name + "' at level " +
                          std::to_string(li + 1));
        }
    }

    for (std::size_t li = 0; li < levels_.size(); ++li) {
        for (std::size_t idx = 0; idx < levels_[li].size(); ++idx) {
            const ClassId c{li + 1, idx};
            const auto& ps = parents_[li][idx];
            if (li == 0) {
                if (!ps.empty())
                    violation("level structure: level-1 class " + describe(*this, c) +
                              " must not have a parent");
                continue;
            }
            if (ps.empty())
                violation("single parent: class " + describe(*this, c) + " has no parent");
            if (ps.size() > 1)
                violation("single parent: class " + describe(*this, c) + " has " +
                          std::to_string(ps.size()) + " parents");
            for (ClassId p : ps) {
                if (p.level + 1 != c.level)
                    violation("level structure: parent of " + describe(*this, c) + " is " +
                              describe(*this, p) + ", must be one level above");
            }
        }
    }

    // Cycle scan over the raw edges. A level-respecting tree cannot contain a
    // cycle, but arbitrary edges can; a class reachable from itself violates
    // anti-reflexivity (and for a 2-cycle, asymmetry).
    const std::size_t total = num_classes();
    std::vector<std::size_t> offset(levels_.size(), 0);
    for (std::size_t li = 1; li < levels_.size(); ++li)
        offset[li] = offset[li - 1] + levels_[li - 1].size();
    auto flat = [&](ClassId c) { return offset[c.level - 1] + c.index; };

    std::vector<int> state(total, 0); // 0 unvisited, 1 on stack, 2 done
    std::vector<ClassId> all;
    all.reserve(total);
    for (std::size_t li = 0; li < levels_.size(); ++li)
        for (std::size_t idx = 0; idx < levels_[li].size(); ++idx)
            all.push_back(ClassId{li + 1, idx});

    std::function<void(ClassId)> visit = [&](ClassId c) {
        state[flat(c)] = 1;
        for (ClassId p : parents_[c.level - 1][c.index]) {
            if (p == c) {
                violation("anti-reflexivity: class " + describe(*this, c) +
                          " is its own parent");
                continue;
            }
            const std::size_t pf = flat(p);
            if (state[pf] == 1) {
                violation("anti-reflexivity: class " + describe(*this, p) +
                          " is its own ancestor (cycle in the subclass relation)");
                // mutual pair also breaks asymmetry
                const auto& back = parents_[p.level - 1][p.index];
                if (std::find(back.begin(), back.end(), c) != back.end() &&
                    std::find(parents_[c.level - 1][c.index].begin(),
                              parents_[c.level - 1][c.index].end(), p) !=
                        parents_[c.level - 1][c.index].end())
                    violation("asymmetry: classes " + describe(*this, c) + " and " +
                              describe(*this, p) + " are each other's parent");
            } else if (state[pf] == 0) {
                visit(p);
            }
        }
        state[flat(c)] = 2;
    };
    for (ClassId c : all)
        if (state[flat(c)] == 0) visit(c);

    return result;
}

std::vector<ClassId> Taxonomy::ancestor_closure(ClassId c) const {
    require_exists(c);
    std::vector<ClassId> chain;
    ClassId cur = c;
    while (cur.level > 1) {
        cur = parent(cur);
        chain.push_back(cur);
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

bool Taxonomy::is_consistent_path(const std::vector<ClassId>& path) const {
    if (path.size() != levels_.size())
        throw std::invalid_argument("is_consistent_path: path must have one entry per level");
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i].level != i + 1)
            throw std::invalid_argument("is_consistent_path: entry at wrong level");
        require_exists(path[i]);
    }
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (!(parent(path[i]) == path[i - 1])) return false;
    }
    return true;
}

bool Taxonomy::is_consistent_path(const std::vector<std::size_t>& path_indices) const {
    std::vector<ClassId> path;
    path.reserve(path_indices.size());
    for (std::size_t i = 0; i < path_indices.size(); ++i)
        path.push_back(ClassId{i + 1, path_indices[i]});
    return is_consistent_path(path);
}

TransitionMatrix Taxonomy::transition_matrix(std::size_t level) const {
    if (level < 1 || level + 1 > levels_.size())
        throw std::out_of_range("transition_matrix: level out of range");
    const std::size_t rows = levels_[level - 1].size();
    const std::size_t cols = levels_[level].size();
    Matrix dense(rows, cols, 0.0);
    std::vector<std::size_t> parent_of(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        const ClassId p = parent(ClassId{level + 1, j});
        dense(p.index, j) = 1.0;
        parent_of[j] = p.index;
    }
    return TransitionMatrix(std::move(dense), std::move(parent_of));
}

std::vector<TransitionMatrix> Taxonomy::transition_matrices() const {
    std::vector<TransitionMatrix> mats;
    mats.reserve(levels_.size() - 1);
    for (std::size_t i = 1; i < levels_.size(); ++i)
        mats.push_back(transition_matrix(i));
    return mats;
}

std::string Taxonomy::serialize() const {
    json doc;
    doc["levels"] = json::array();
    for (const auto& names : levels_) doc["levels"].push_back(names);
    json parents = json::object();
    for (std::size_t li = 1; li < levels_.size(); ++li) {
        for (std::size_t idx = 0; idx < levels_[li].size(); ++idx) {
            const auto& ps = parents_[li][idx];
            if (ps.size() == 1 && ps.front().level == li) {
                const std::string key = std::to_string(li + 1) + "/" + levels_[li][idx];
                parents[key] = levels_[li - 1][ps.front().index];
            }
        }
    }
    doc["parents"] = parents;
    return doc.dump();
}

std::string Taxonomy::sha256() const {
    const std::string text = serialize();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

Taxonomy Taxonomy::parse(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("taxonomy: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("levels") || !doc["levels"].is_array())
        throw ValidationError("taxonomy: document must be an object with a 'levels' array");

    std::vector<std::vector<std::string>> levels;
    for (const auto& level : doc["levels"]) {
        if (!level.is_array())
            throw ValidationError("taxonomy: each level must be an array of names");
        std::vector<std::string> names;
        std::unordered_set<std::string> seen;
        for (const auto& entry : level) {
            if (!entry.is_string())
                throw ValidationError("taxonomy: class names must be strings");
            const std::string name = trim(entry.get<std::string>());
            if (name.empty())
                throw ValidationError("taxonomy: empty class name at level " +
                                      std::to_string(levels.size() + 1));
            if (!seen.insert(name).second)
                throw ValidationError("taxonomy: duplicate class name '" + name +
                                      "' at level " + std::to_string(levels.size() + 1));
            names.push_back(name);
        }
        if (names.empty())
            throw ValidationError("taxonomy: level " + std::to_string(levels.size() + 1) +
                                  " is empty");
        levels.push_back(std::move(names));
    }
    if (levels.size() < 2)
        throw ValidationError("taxonomy: at least 2 levels required");

    // name -> index per level for parent resolution
    std::vector<std::unordered_map<std::string, std::size_t>> index(levels.size());
    for (std::size_t li = 0; li < levels.size(); ++li)
        for (std::size_t i = 0; i < levels[li].size(); ++i) index[li][levels[li][i]] = i;

    std::vector<std::pair<ClassId, ClassId>> edges;
    if (doc.contains("parents")) {
        if (!doc["parents"].is_object())
            throw ValidationError("taxonomy: 'parents' must be an object");
        for (const auto& [key, value] : doc["parents"].items()) {
            const auto slash = key.find('/');
            if (slash == std::string::npos)
                throw ValidationError("taxonomy: parent key '" + key +
                                      "' must look like '<level>/<child name>'");
            std::size_t level = 0;
            try {
                level = std::stoul(key.substr(0, slash));
            } catch (const std::exception&) {
                throw ValidationError("taxonomy: parent key '" + key +
                                      "' has a non-numeric level");
            }
            if (level < 2 || level > levels.size())
                throw ValidationError("taxonomy: parent key '" + key +
                                      "' level must be in 2.." + std::to_string(levels.size()));
            const std::string child_name = trim(key.substr(slash + 1));
            auto child_it = index[level - 1].find(child_name);
            if (child_it == index[level - 1].end())
                throw ValidationError("taxonomy: parent key '" + key +
                                      "' names an unknown class at level " +
                                      std::to_string(level));
            if (!value.is_string())
                throw ValidationError("taxonomy: parent of '" + key + "' must be a string");
            const std::string parent_name = trim(value.get<std::string>());
            auto parent_it = index[level - 2].find(parent_name);
            if (parent_it == index[level - 2].end()) {
                // a class found at some other level is a structure error, not a typo
                for (std::size_t li = 0; li < levels.size(); ++li) {
                    if (li != level - 2 && index[li].count(parent_name))
                        throw ValidationError("taxonomy: parent '" + parent_name + "' of '" +
                                              child_name + "' (level " + std::to_string(level) +
                                              ") must be one level above, at level " +
                                              std::to_string(level - 1));
                }
                throw ValidationError("taxonomy: unknown parent class '" + parent_name +
                                      "' for '" + key + "'");
            }
            edges.emplace_back(ClassId{level, child_it->second},
                               ClassId{level - 1, parent_it->second});
        }
    }

    Taxonomy t(std::move(levels), std::move(edges));
    const ValidationResult check = t.validate();
    if (!check.ok()) {
        std::string what = "taxonomy: invalid structure:";
        for (const auto& v : check.violations) what += "\n  " + v;
        throw ValidationError(what);
    }
    return t;
}

Taxonomy load_taxonomy_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read taxonomy file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return Taxonomy::parse(buf.str());
}

} // namespace ttc
