#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "harlog/common.hpp"
#include "harlog/pose.hpp"

namespace harlog {

inline constexpr std::size_t kNumActivities = 7;
inline constexpr std::size_t kNumConcepts = 6;

// Fixed activity label order (reports index confusion matrices this way).
inline constexpr std::array<const char*, kNumActivities> kActivityNames = {
    "walk", "run", "squat", "jump", "wave", "clap", "wipe",
};

inline std::optional<std::size_t> activity_index(const std::string& name) {
    for (std::size_t i = 0; i < kNumActivities; ++i)
        if (name == kActivityNames[i]) return i;
    return std::nullopt;
}

class ThresholdUndefined : public DomainError {
public:
    explicit ThresholdUndefined(std::size_t node_id)
        : DomainError("node " + std::to_string(node_id) + ": routed subset is single-class, threshold undefined"),
          node_id(node_id) {}
    std::size_t node_id;
};

// A child is either another concept node (by index) or an activity leaf.
struct NodeRef {
    bool is_leaf = false;
    std::size_t index = 0;  // node index or activity index
};

struct ConceptNode {
    std::size_t id = 0;  // 1-based, matches the net id driving it
    Limb limb{};
    std::string concept_name;  // "move" or "move_a_lot"
    double threshold = 0.0;
    NodeRef yes;
    NodeRef no;
};

struct ConceptTree {
    std::array<ConceptNode, kNumConcepts> nodes{};  // nodes[0] is the root

    const ConceptNode& root() const { return nodes[0]; }
};

// Fixed six-node topology: the root tests right-lower-leg motion, a second
// node re-tests the same limb with a higher threshold, and the remaining
// nodes peel off one activity pair each. Thresholds start at zero and are
// filled in by fit_thresholds.
inline ConceptTree canonical_tree() {
    ConceptTree t;
    auto node = [](std::size_t i) { return NodeRef{false, i}; };
    auto leaf = [](std::size_t a) { return NodeRef{true, a}; };
    t.nodes[0] = {1, Limb::RightLowerLeg, "move", 0.0, node(1), node(4)};
    t.nodes[1] = {2, Limb::RightLowerLeg, "move_a_lot", 0.0, node(2), node(3)};
    t.nodes[2] = {3, Limb::RightUpperArm, "move", 0.0, leaf(1), leaf(0)};   // run | walk
    t.nodes[3] = {4, Limb::LeftUpperLeg, "move", 0.0, leaf(2), leaf(3)};    // squat | jump
    t.nodes[4] = {5, Limb::LeftUpperArm, "move", 0.0, leaf(4), node(5)};    // wave | ...
    t.nodes[5] = {6, Limb::LeftLowerArm, "move", 0.0, leaf(5), leaf(6)};    // clap | wipe
    return t;
}

// Root-to-leaf path of an activity: (node index, outcome at that node).
inline std::vector<std::pair<std::size_t, bool>> activity_path(const ConceptTree& tree, std::size_t activity) {
    std::vector<std::pair<std::size_t, bool>> path;
    // depth-first search from the root; the tree is tiny
    struct Walker {
        const ConceptTree& t;
        std::size_t target;
        std::vector<std::pair<std::size_t, bool>> out;
        bool visit(NodeRef ref, std::vector<std::pair<std::size_t, bool>>& acc) {
            if (ref.is_leaf) return ref.index == target;
            for (bool outcome : {true, false}) {
                acc.emplace_back(ref.index, outcome);
                if (visit(outcome ? t.nodes[ref.index].yes : t.nodes[ref.index].no, acc)) return true;
                acc.pop_back();
            }
            return false;
        }
    } w{tree, activity, {}};
    std::vector<std::pair<std::size_t, bool>> acc;
    if (!w.visit(NodeRef{false, 0}, acc)) throw DomainError("activity not found in tree");
    return acc;
}

// Full ground-truth concept table per activity (columns are nodes 1..6).
// On-path entries are forced by the topology; off-path entries reflect the
// synthetic motion archetypes and only matter for the all-samples concept
// accuracy mode.
inline constexpr std::array<std::array<bool, kNumConcepts>, kNumActivities> kConceptTruth = {{
    {true, true, false, true, false, false},   // walk
    {true, true, true, true, true, true},      // run
    {true, false, false, true, false, false},  // squat
    {true, false, false, false, false, false}, // jump
    {false, false, true, false, true, true},   // wave
    {false, false, false, false, false, true}, // clap
    {false, false, false, false, false, false} // wipe
}};

// Activities routed through each side of a node, for threshold fitting.
inline void routed_activities(const ConceptTree& tree, NodeRef ref, std::vector<std::size_t>& out) {
    if (ref.is_leaf) {
        out.push_back(ref.index);
        return;
    }
    routed_activities(tree, tree.nodes[ref.index].yes, out);
    routed_activities(tree, tree.nodes[ref.index].no, out);
}

// Per node, exhaustive scan over midpoints of sorted unique delta values of
// the tested limb, restricted to the samples routed through that node;
// the threshold maximizing split accuracy wins, ties broken by the lowest
// midpoint. "yes" means delta > threshold.
inline ConceptTree fit_thresholds(std::span<const MotionFeatureVector> features, ConceptTree tree = canonical_tree()) {
    for (std::size_t n = 0; n < kNumConcepts; ++n) {
        auto& node = tree.nodes[n];
        std::vector<std::size_t> yes_group, no_group;
        routed_activities(tree, node.yes, yes_group);
        routed_activities(tree, node.no, no_group);
        auto in = [](const std::vector<std::size_t>& g, std::size_t a) {
            return std::find(g.begin(), g.end(), a) != g.end();
        };

        std::vector<std::pair<double, bool>> pts;  // (delta, is_yes_class)
        for (const auto& f : features) {
            if (!f.label) continue;
            auto a = activity_index(*f.label);
            if (!a) throw ValidationError("unknown activity label: " + *f.label);
            if (in(yes_group, *a))
                pts.emplace_back(f.delta[static_cast<std::size_t>(node.limb)], true);
            else if (in(no_group, *a))
                pts.emplace_back(f.delta[static_cast<std::size_t>(node.limb)], false);
        }
        bool have_yes = std::any_of(pts.begin(), pts.end(), [](auto& p) { return p.second; });
        bool have_no = std::any_of(pts.begin(), pts.end(), [](auto& p) { return !p.second; });
        if (!have_yes || !have_no) throw ThresholdUndefined(node.id);

        std::sort(pts.begin(), pts.end());
        std::vector<double> candidates;
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (pts[i].first > pts[i - 1].first) candidates.push_back(0.5 * (pts[i - 1].first + pts[i].first));
        if (candidates.empty()) throw ThresholdUndefined(node.id);

        double best_t = candidates.front();
        std::size_t best_correct = 0;
        for (double t : candidates) {
            std::size_t correct = 0;
            for (const auto& [d, is_yes] : pts) correct += ((d > t) == is_yes) ? 1 : 0;
            if (correct > best_correct) {
                best_correct = correct;
                best_t = t;
            }
        }
        node.threshold = best_t;
    }
    return tree;
}

// Deterministic routing: compare delta[limb] > threshold at each node.
inline std::size_t classify_tree(const ConceptTree& tree, const std::array<double, kNumLimbs>& delta) {
    NodeRef ref{false, 0};
    while (!ref.is_leaf) {
        const auto& node = tree.nodes[ref.index];
        ref = (delta[static_cast<std::size_t>(node.limb)] > node.threshold) ? node.yes : node.no;
    }
    return ref.index;
}

// -- program emission ------------------------------------------------------

inline std::string concept_atom(const ConceptNode& node, bool outcome, const std::string& var = "X") {
    return node.concept_name + "(" + var + ", " + kLimbNames[static_cast<std::size_t>(node.limb)] + ", " +
           (outcome ? "yes" : "no") + ")";
}

// One neural AD per concept node, one rule per leaf whose body is the
// conjunction of node outcomes along the root-to-leaf path, one query per
// activity. Formatting is canonical: parsing and re-printing the result is
// the identity.
inline std::string emit_program(const ConceptTree& tree) {
    std::string out;
    for (const auto& node : tree.nodes) {
        out += "nn(net" + std::to_string(node.id) + ", X) :: " + concept_atom(node, true) + " ; " +
               concept_atom(node, false) + ".\n";
    }
    for (std::size_t a = 0; a < kNumActivities; ++a) {
        out += "activity(X, " + std::string(kActivityNames[a]) + ") :- ";
        auto path = activity_path(tree, a);
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i) out += ", ";
            out += concept_atom(tree.nodes[path[i].first], path[i].second);
        }
        out += ".\n";
    }
    for (std::size_t a = 0; a < kNumActivities; ++a)
        out += "query(activity(X, " + std::string(kActivityNames[a]) + ")).\n";
    return out;
}

// -- JSON round-trip -------------------------------------------------------

inline nlohmann::json node_ref_json(const NodeRef& ref) {
    if (ref.is_leaf) return nlohmann::json{{"leaf", kActivityNames[ref.index]}};
    return nlohmann::json{{"node", ref.index + 1}};
}

inline nlohmann::json tree_to_json(const ConceptTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back({{"id", n.id},
                         {"limb", kLimbNames[static_cast<std::size_t>(n.limb)]},
                         {"concept", n.concept_name},
                         {"threshold", n.threshold},
                         {"yes", node_ref_json(n.yes)},
                         {"no", node_ref_json(n.no)}});
    }
    nlohmann::json leaves = nlohmann::json::array();
    for (auto* name : kActivityNames) leaves.push_back(name);
    return nlohmann::json{{"nodes", nodes}, {"leaves", leaves}};
}

inline NodeRef node_ref_from_json(const nlohmann::json& j) {
    if (j.contains("leaf")) {
        auto a = activity_index(j["leaf"].get<std::string>());
        if (!a) throw ValidationError("tree: unknown leaf activity " + j["leaf"].dump());
        return NodeRef{true, *a};
    }
    auto id = j.at("node").get<std::size_t>();
    if (id < 1 || id > kNumConcepts) throw ValidationError("tree: node reference out of range");
    return NodeRef{false, id - 1};
}

inline ConceptTree tree_from_json(const nlohmann::json& j) {
    ConceptTree tree;
    const auto& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.size() != kNumConcepts)
        throw ValidationError("tree: expected exactly 6 nodes");
    std::array<bool, kNumConcepts> seen{};
    for (const auto& nj : nodes) {
        auto id = nj.at("id").get<std::size_t>();
        if (id < 1 || id > kNumConcepts || seen[id - 1]) throw ValidationError("tree: bad or duplicate node id");
        seen[id - 1] = true;
        auto limb = limb_from_name(nj.at("limb").get<std::string>());
        if (!limb) throw ValidationError("tree: unknown limb " + nj.at("limb").dump());
        auto& n = tree.nodes[id - 1];
        n.id = id;
        n.limb = *limb;
        n.concept_name = nj.value("concept", "move");
        n.threshold = nj.at("threshold").get<double>();
        if (!std::isfinite(n.threshold)) throw ValidationError("tree: non-finite threshold");
        n.yes = node_ref_from_json(nj.at("yes"));
        n.no = node_ref_from_json(nj.at("no"));
    }
    // every activity must appear exactly once
    std::array<std::size_t, kNumActivities> count{};
    std::vector<std::size_t> all;
    routed_activities(tree, NodeRef{false, 0}, all);
    if (all.size() != kNumActivities) throw ValidationError("tree: expected 7 reachable leaves");
    for (auto a : all) ++count[a];
    for (auto c : count)
        if (c != 1) throw ValidationError("tree: every activity must appear exactly once");
    return tree;
}

inline ConceptTree load_tree(const std::filesystem::path& path) {
    try {
        return tree_from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("tree " + path.string() + ": " + e.what());
    }
}

}  // namespace harlog
