#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "guardkit/error.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Three-level safety taxonomy: 16 top-level categories, 126 mid-level
// categories, 854 leaf labels in the shipped file. Node ids double as the
// label strings used by task views.
// ---------------------------------------------------------------------------

struct TaxonomyNode {
    std::string id;
    std::string name;
    int level = 0;                      // 1, 2 or 3
    std::optional<std::string> parent;  // absent for level-1 nodes
    std::vector<std::string> children;  // ordered child ids
};

class Taxonomy {
public:
    const TaxonomyNode& node(const std::string& id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw TaxonomyError("unknown node id", id);
        return it->second;
    }

    bool contains(const std::string& id) const { return nodes_.count(id) > 0; }

    const std::vector<std::string>& roots() const { return roots_; }

    std::size_t count_at_level(int level) const {
        std::size_t n = 0;
        for (const auto& [id, node] : nodes_)
            if (node.level == level) ++n;
        return n;
    }

    std::size_t size() const { return nodes_.size(); }

    // Internal: used by the loader, which owns validation.
    void add_node(TaxonomyNode node, bool is_root) {
        if (is_root) roots_.push_back(node.id);
        nodes_.emplace(node.id, std::move(node));
    }

private:
    std::unordered_map<std::string, TaxonomyNode> nodes_;
    std::vector<std::string> roots_;
};

// Ordered candidate label set. Order is load-bearing: it fixes the index
// order of logit vectors everywhere downstream.
struct LabelSet {
    std::vector<std::string> labels;
    std::map<std::string, std::string> descriptions;
    std::map<std::string, std::vector<std::string>> synonyms;

    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> names) : labels(std::move(names)) {
        validate();
    }

    void validate() const {
        if (labels.empty()) throw Error("LabelSet must be non-empty");
        std::unordered_set<std::string> seen;
        for (const auto& l : labels)
            if (!seen.insert(l).second)
                throw Error("duplicate label in LabelSet: " + l);
    }

    std::size_t size() const { return labels.size(); }

    std::optional<std::size_t> index_of(const std::string& label) const {
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels.begin());
    }

    bool contains(const std::string& label) const {
        return index_of(label).has_value();
    }
};

// ---------------------------------------------------------------------------
// Loading and validation
// ---------------------------------------------------------------------------

namespace detail_taxonomy {

inline void load_node(const nlohmann::json& j, Taxonomy& tax,
                      const std::optional<std::string>& parent_id,
                      int expected_level,
                      std::unordered_set<std::string>& seen_ids) {
    if (!j.is_object()) throw TaxonomyError("node is not an object");
    if (!j.contains("name") || !j.at("name").is_string())
        throw TaxonomyError("node missing string field 'name'");

    TaxonomyNode node;
    node.name = j.at("name").get<std::string>();
    if (node.name.empty()) throw TaxonomyError("node has empty name");
    node.id = j.contains("id") ? j.at("id").get<std::string>() : node.name;

    if (!j.contains("level") || !j.at("level").is_number_integer())
        throw TaxonomyError("node missing integer field 'level'", node.id);
    node.level = j.at("level").get<int>();
    if (node.level < 1 || node.level > 3)
        throw TaxonomyError("level out of range [1,3]", node.id);
    if (node.level != expected_level)
        throw TaxonomyError("level mismatch: level-" + std::to_string(node.level) +
                                " node under level-" +
                                std::to_string(expected_level - 1) + " parent",
                            node.id);

    // An explicit parent field, when present, must agree with the document
    // structure; a disagreement means the node was reparented by hand.
    if (j.contains("parent") && !j.at("parent").is_null()) {
        const auto declared = j.at("parent").get<std::string>();
        if (!parent_id || declared != *parent_id)
            throw TaxonomyError("orphan node: declared parent '" + declared +
                                    "' does not match document position",
                                node.id);
    }

    if (!seen_ids.insert(node.id).second)
        throw TaxonomyError("duplicate node id", node.id);
    node.parent = parent_id;

    std::vector<nlohmann::json> kids;
    if (j.contains("children")) {
        if (!j.at("children").is_array())
            throw TaxonomyError("'children' must be an array", node.id);
        kids.assign(j.at("children").begin(), j.at("children").end());
    }
    if (node.level == 3 && !kids.empty())
        throw TaxonomyError("level-3 node has children", node.id);

    std::unordered_set<std::string> child_names;
    for (const auto& kid : kids) {
        if (kid.contains("name") && kid.at("name").is_string()) {
            const auto child_name = kid.at("name").get<std::string>();
            if (!child_names.insert(child_name).second)
                throw TaxonomyError("duplicate child name '" + child_name + "'",
                                    node.id);
            node.children.push_back(
                kid.contains("id") ? kid.at("id").get<std::string>() : child_name);
        }
    }

    tax.add_node(node, !parent_id.has_value());
    for (const auto& kid : kids)
        load_node(kid, tax, node.id, node.level + 1, seen_ids);
}

}  // namespace detail_taxonomy

// Parses and validates a taxonomy document. The document is a JSON tree:
//   {"declared_counts": {"l1": ..., "l2": ..., "l3": ..., "total": ...},
//    "nodes": [{"name": ..., "level": 1, "children": [...]}, ...]}
// "declared_counts" is optional; when present the parsed tree must match it.
inline Taxonomy load_taxonomy(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc.at("nodes").is_array())
        throw TaxonomyError("taxonomy document must contain a 'nodes' array");

    Taxonomy tax;
    std::unordered_set<std::string> seen_ids;
    std::unordered_set<std::string> root_names;
    for (const auto& j : doc.at("nodes")) {
        if (j.contains("name") && j.at("name").is_string() &&
            !root_names.insert(j.at("name").get<std::string>()).second)
            throw TaxonomyError("duplicate root name '" +
                                j.at("name").get<std::string>() + "'");
        detail_taxonomy::load_node(j, tax, std::nullopt, 1, seen_ids);
    }
    if (tax.roots().empty()) throw TaxonomyError("taxonomy has no level-1 nodes");

    if (doc.contains("declared_counts")) {
        const auto& dc = doc.at("declared_counts");
        const auto check = [&](const char* key, std::size_t actual) {
            if (dc.contains(key) && dc.at(key).get<std::size_t>() != actual)
                throw TaxonomyError(std::string("count mismatch for '") + key +
                                    "': declared " +
                                    dc.at(key).dump() + ", found " +
                                    std::to_string(actual));
        };
        check("l1", tax.count_at_level(1));
        check("l2", tax.count_at_level(2));
        check("l3", tax.count_at_level(3));
        check("total", tax.size());
    }
    return tax;
}

inline Taxonomy load_taxonomy_from_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw TaxonomyError(std::string("invalid taxonomy document: ") + e.what());
    }
    return load_taxonomy(doc);
}

inline Taxonomy load_taxonomy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open taxonomy file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_taxonomy_from_string(buf.str());
}

inline nlohmann::json serialize_taxonomy(const Taxonomy& tax) {
    const std::function<nlohmann::json(const std::string&)> emit =
        [&](const std::string& id) {
            const auto& n = tax.node(id);
            nlohmann::json j{{"name", n.name}, {"level", n.level}};
            if (n.id != n.name) j["id"] = n.id;
            if (!n.children.empty()) {
                auto kids = nlohmann::json::array();
                for (const auto& c : n.children) kids.push_back(emit(c));
                j["children"] = kids;
            }
            return j;
        };
    auto nodes = nlohmann::json::array();
    for (const auto& r : tax.roots()) nodes.push_back(emit(r));
    return nlohmann::json{
        {"declared_counts",
         {{"l1", tax.count_at_level(1)},
          {"l2", tax.count_at_level(2)},
          {"l3", tax.count_at_level(3)},
          {"total", tax.size()}}},
        {"nodes", nodes}};
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

// Level-2 and level-3 descendant counts under one level-1 node.
inline std::pair<std::size_t, std::size_t> subtree_counts(const Taxonomy& tax,
                                                          const std::string& root) {
    const auto& r = tax.node(root);
    if (r.level != 1)
        throw TaxonomyError("subtree_counts requires a level-1 node", root);
    std::size_t l2 = 0, l3 = 0;
    for (const auto& c2 : r.children) {
        ++l2;
        l3 += tax.node(c2).children.size();
    }
    return {l2, l3};
}

struct SliceSelector {
    enum class Kind { level1, children_of };
    Kind kind = Kind::level1;
    std::string root;

    static SliceSelector level1() { return {}; }
    static SliceSelector children_of(std::string root_id) {
        return {Kind::children_of, std::move(root_id)};
    }
};

// Projects a taxonomy slice into a LabelSet, preserving document order.
inline LabelSet slice(const Taxonomy& tax, const SliceSelector& sel) {
    std::vector<std::string> names;
    if (sel.kind == SliceSelector::Kind::level1) {
        for (const auto& r : tax.roots()) names.push_back(tax.node(r).name);
    } else {
        const auto& r = tax.node(sel.root);
        if (r.level != 1)
            throw TaxonomyError("children-of selector requires a level-1 node",
                                sel.root);
        if (r.children.empty())
            throw TaxonomyError("empty slice: node has no children", sel.root);
        for (const auto& c : r.children) names.push_back(tax.node(c).name);
    }
    return LabelSet(std::move(names));
}

// Root-to-leaf name path (L1, L2, L3) for a level-3 node.
inline std::array<std::string, 3> leaf_path(const Taxonomy& tax,
                                            const std::string& leaf) {
    const auto& l3 = tax.node(leaf);
    if (l3.level != 3) throw TaxonomyError("not a leaf (level-3) node", leaf);
    const auto& l2 = tax.node(*l3.parent);
    const auto& l1 = tax.node(*l2.parent);
    return {l1.name, l2.name, l3.name};
}

}  // namespace guardkit
