#include <catch_amalgamated.hpp>

#include <random>

#include "harlog/keypoints_synth.hpp"
#include "harlog/logic.hpp"
#include "harlog/pose.hpp"
#include "harlog/tree.hpp"

using namespace harlog;
using Catch::Approx;

namespace {

MotionFeatureVector fv(std::array<double, kNumLimbs> delta, const std::string& label) {
    MotionFeatureVector v;
    v.delta = delta;
    v.label = label;
    return v;
}

std::vector<MotionFeatureVector> synthetic_features(std::uint64_t seed, double seconds = 12.0) {
    std::vector<MotionFeatureVector> all;
    for (std::size_t a = 0; a < kNumActivities; ++a) {
        auto frames = synth_keypoints(a, seconds, 30.0, seed + a, 1.0);
        WindowConfig cfg;
        cfg.stride_frames = 5;
        auto feats = extract_features(frames, default_limb_map(), cfg, nullptr, std::string(kActivityNames[a]));
        all.insert(all.end(), feats.begin(), feats.end());
    }
    return all;
}

}  // namespace

TEST_CASE("canonical topology shape") {
    auto tree = canonical_tree();
    // depths: wave 2, everything else 3
    for (std::size_t a = 0; a < kNumActivities; ++a) {
        auto path = activity_path(tree, a);
        CHECK(path.size() == (std::string(kActivityNames[a]) == "wave" ? 2u : 3u));
    }
    // nodes 1 and 2 test the same limb
    CHECK(tree.nodes[0].limb == tree.nodes[1].limb);
    CHECK(tree.nodes[1].concept_name == "move_a_lot");
}

TEST_CASE("concept truth table is consistent with tree paths") {
    auto tree = canonical_tree();
    for (std::size_t a = 0; a < kNumActivities; ++a)
        for (auto [node, outcome] : activity_path(tree, a)) CHECK(kConceptTruth[a][node] == outcome);
}

TEST_CASE("fit_thresholds separates two clean 1-D clusters at the midpoint gap") {
    // two well-separated groups on the root limb
    std::vector<MotionFeatureVector> feats;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lo(0.05, 0.15), hi(1.9, 2.1);
    for (int i = 0; i < 40; ++i) {
        for (std::size_t a = 0; a < kNumActivities; ++a) {
            std::array<double, kNumLimbs> d{};
            for (std::size_t n = 0; n < kNumConcepts; ++n) {
                auto limb = static_cast<std::size_t>(canonical_tree().nodes[n].limb);
                // later nodes overwrite shared limbs; node 2's "a lot" handled below
                d[limb] = kConceptTruth[a][n] ? hi(rng) : lo(rng);
            }
            // right lower leg carries both node 1 and node 2: three levels
            auto rll = static_cast<std::size_t>(Limb::RightLowerLeg);
            if (!kConceptTruth[a][0])
                d[rll] = lo(rng);
            else
                d[rll] = kConceptTruth[a][1] ? hi(rng) + 2.0 : hi(rng) - 1.0;  // ~1 vs ~4
            feats.push_back(fv(d, kActivityNames[a]));
        }
    }
    auto tree = fit_thresholds(feats);
    // node 1 threshold sits between the quiet (~0.1) and modest (~1) groups
    CHECK(tree.nodes[0].threshold > 0.15);
    CHECK(tree.nodes[0].threshold < 0.95);
    // node 2 between modest (~1) and broad (~4)
    CHECK(tree.nodes[1].threshold > 1.1);
    CHECK(tree.nodes[1].threshold < 3.9);
    // the fitted tree classifies its own training data perfectly
    for (const auto& f : feats) CHECK(kActivityNames[classify_tree(tree, f.delta)] == *f.label);
}

TEST_CASE("fit_thresholds fails on a single-class node") {
    std::vector<MotionFeatureVector> feats;
    for (int i = 0; i < 10; ++i) feats.push_back(fv({1, 1, 1, 1, 1, 1, 1, 1}, "walk"));
    CHECK_THROWS_AS(fit_thresholds(feats), ThresholdUndefined);
}

TEST_CASE("tie-breaking picks the lowest midpoint") {
    // inseparable values: every candidate has the same accuracy
    std::vector<MotionFeatureVector> feats;
    for (std::size_t a = 0; a < kNumActivities; ++a) {
        for (int i = 0; i < 3; ++i) {
            std::array<double, kNumLimbs> d{};
            for (std::size_t l = 0; l < kNumLimbs; ++l) d[l] = static_cast<double>(i);
            feats.push_back(fv(d, kActivityNames[a]));
        }
    }
    auto tree = fit_thresholds(feats);
    CHECK(tree.nodes[0].threshold == Approx(0.5));  // lowest midpoint of {0,1,2}
}

TEST_CASE("fit on synthetic traces reproduces the expected family split") {
    auto feats = synthetic_features(100);
    auto tree = fit_thresholds(feats);

    // node 1: right lower leg separates {walk,run,squat,jump} from the rest
    std::size_t correct = 0, total = 0;
    auto rll = static_cast<std::size_t>(Limb::RightLowerLeg);
    for (const auto& f : feats) {
        auto a = *activity_index(*f.label);
        bool legs_move = kConceptTruth[a][0];
        correct += ((f.delta[rll] > tree.nodes[0].threshold) == legs_move) ? 1 : 0;
        ++total;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.95);

    // full-tree accuracy on the video reference
    std::size_t hits = 0;
    for (const auto& f : feats) hits += (kActivityNames[classify_tree(tree, f.delta)] == *f.label) ? 1 : 0;
    CHECK(static_cast<double>(hits) / static_cast<double>(feats.size()) >= 0.95);
}

TEST_CASE("classify_tree routes deterministically") {
    auto tree = canonical_tree();
    for (auto& n : tree.nodes) n.threshold = 0.5;
    SECTION("broad legs and arms reach run") {
        std::array<double, kNumLimbs> d{};
        d[static_cast<std::size_t>(Limb::RightLowerLeg)] = 2.0;
        d[static_cast<std::size_t>(Limb::RightUpperArm)] = 1.0;
        CHECK(std::string(kActivityNames[classify_tree(tree, d)]) == "run");
    }
    SECTION("quiet legs with left arm motion reach wave") {
        std::array<double, kNumLimbs> d{};
        d[static_cast<std::size_t>(Limb::LeftUpperArm)] = 1.0;
        CHECK(std::string(kActivityNames[classify_tree(tree, d)]) == "wave");
    }
    SECTION("all-zero delta reaches the all-no leaf (wipe)") {
        std::array<double, kNumLimbs> d{};
        CHECK(std::string(kActivityNames[classify_tree(tree, d)]) == "wipe");
    }
}

TEST_CASE("emit_program structure") {
    auto tree = canonical_tree();
    auto src = emit_program(tree);
    auto prog = logic::parse_program(src);
    REQUIRE(prog.nads.size() == 6);
    REQUIRE(prog.rules.size() == 7);
    // the wave rule has exactly two body literals
    for (const auto& r : prog.rules)
        if (r.head.args.size() == 2 && r.head.args[1].name == "wave") CHECK(r.body.size() == 2);
    CHECK(logic::program_to_string(prog) == src);
}

TEST_CASE("tree classification agrees with the logic program under hard concepts") {
    auto feats = synthetic_features(200, 6.0);
    auto tree = fit_thresholds(feats);
    auto prog = logic::parse_program(emit_program(tree));
    std::array<logic::Circuit, kNumActivities> circuits;
    for (std::size_t a = 0; a < kNumActivities; ++a)
        circuits[a] = logic::ground_and_compile(prog, "activity(X, " + std::string(kActivityNames[a]) + ")");

    // net k's hard probability = [delta > threshold]
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dd(0.0, 3.0);
    for (int rep = 0; rep < 1000; ++rep) {
        std::array<double, kNumLimbs> delta{};
        for (auto& d : delta) d = dd(rng);
        std::vector<double> probs(prog.num_vars(), 0.0);
        for (const auto& nad : prog.nads) {
            const auto& node = tree.nodes[nad.net_id - 1];
            probs[nad.var_id] = delta[static_cast<std::size_t>(node.limb)] > node.threshold ? 1.0 : 0.0;
        }
        std::size_t logic_winner = 0;
        int winners = 0;
        for (std::size_t a = 0; a < kNumActivities; ++a) {
            if (logic::wmc(circuits[a], probs) > 0.5) {
                logic_winner = a;
                ++winners;
            }
        }
        REQUIRE(winners == 1);
        CHECK(logic_winner == classify_tree(tree, delta));
    }
}

TEST_CASE("tree JSON round-trip") {
    auto feats = synthetic_features(300, 6.0);
    auto tree = fit_thresholds(feats);
    auto j = tree_to_json(tree);
    auto back = tree_from_json(j);
    for (std::size_t n = 0; n < kNumConcepts; ++n) {
        CHECK(back.nodes[n].limb == tree.nodes[n].limb);
        CHECK(back.nodes[n].threshold == tree.nodes[n].threshold);
        CHECK(back.nodes[n].yes.is_leaf == tree.nodes[n].yes.is_leaf);
        CHECK(back.nodes[n].yes.index == tree.nodes[n].yes.index);
    }
    SECTION("duplicate leaf rejected") {
        j["nodes"][5]["no"] = {{"leaf", "clap"}};
        CHECK_THROWS_AS(tree_from_json(j), ValidationError);
    }
}
