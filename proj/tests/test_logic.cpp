#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "harlog/logic.hpp"
#include "harlog/tree.hpp"
#include "support/naive_oracle.hpp"

using namespace harlog;
using Catch::Approx;

using testsupport::NaiveProgram;
using testsupport::random_program;


TEST_CASE("parse smallest NAD") {
    auto prog = logic::parse_program("nn(net1, X) :: move(X, rll, yes) ; move(X, rll, no).\n");
    REQUIRE(prog.nads.size() == 1);
    CHECK(prog.nads[0].net_id == 1);
    CHECK(prog.nads[0].input_var == "X");
    CHECK(prog.nads[0].outcomes[0].pred == "move");
    CHECK(prog.num_vars() == 1);
}

TEST_CASE("fact and rule inference") {
    auto prog = logic::parse_program("0.5::a. b :- a. query(b).");
    auto circuit = logic::ground_and_compile(prog, prog.queries[0]);
    CHECK(logic::wmc(circuit, prog.default_leaf_probs()) == Approx(0.5));
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(logic::parse_program("0.5::a"), logic::ParseError);          // missing period
    CHECK_THROWS_AS(logic::parse_program("b :- a. query(b)."), logic::ParseError);  // undefined a
    CHECK_THROWS_AS(logic::parse_program("1.5::a."), logic::ParseError);        // prob out of range
    CHECK_THROWS_AS(logic::parse_program("0.3::a ; 0.4::b."), logic::ParseError);  // AD sum != 1
    CHECK_THROWS_AS(
        logic::parse_program("nn(net1, X) :: a(X) ; b(X).\nnn(net1, X) :: c(X) ; d(X).\n"),
        logic::ParseError);  // duplicate net id
    try {
        logic::parse_program("0.5::a.\nb :- zz.\nquery(b).");
        FAIL("expected ParseError");
    } catch (const logic::ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("recursion is rejected") {
    auto prog = logic::parse_program("0.5::f. a :- b. b :- a, f. query(a).");
    CHECK_THROWS_AS(logic::ground_and_compile(prog, prog.queries[0]), logic::UnsupportedRecursion);
}

TEST_CASE("query on a fact compiles to a single leaf") {
    auto prog = logic::parse_program("0.25::a. query(a).");
    auto c = logic::ground_and_compile(prog, prog.queries[0]);
    CHECK(c.used_vars.size() == 1);
    CHECK(logic::wmc(c, prog.default_leaf_probs()) == Approx(0.25));
}

TEST_CASE("independence product") {
    auto prog = logic::parse_program("0.3::p. 0.4::q. both :- p, q. query(both).");
    auto c = logic::ground_and_compile(prog, prog.queries[0]);
    CHECK(logic::wmc(c, prog.default_leaf_probs()) == Approx(0.12));
    auto g = logic::wmc_grad(c, prog.default_leaf_probs());
    CHECK(g[0] == Approx(0.4));
    CHECK(g[1] == Approx(0.3));
}

TEST_CASE("single-fact query has unit gradient") {
    auto prog = logic::parse_program("0.3::p. 0.4::q. query(p).");
    auto c = logic::ground_and_compile(prog, prog.queries[0]);
    auto g = logic::wmc_grad(c, prog.default_leaf_probs());
    CHECK(g[0] == Approx(1.0));
    CHECK(g[1] == Approx(0.0));
}

TEST_CASE("wmc matches a naive truth-table oracle on random programs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pd(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        auto src = random_program(rng);
        INFO(src);
        auto prog = logic::parse_program(src);
        REQUIRE(prog.num_vars() <= 8);
        std::vector<double> probs(prog.num_vars());
        for (auto& p : probs) p = pd(rng);
        auto c = logic::ground_and_compile(prog, prog.queries[0]);
        NaiveProgram naive{prog};
        CHECK(logic::wmc(c, probs) == Approx(naive.probability(prog.queries[0], probs)).margin(1e-12));
    }
}

TEST_CASE("wmc_grad matches central finite differences") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> pd(0.05, 0.95);
    for (int rep = 0; rep < 100; ++rep) {
        auto prog = logic::parse_program(random_program(rng));
        std::vector<double> probs(prog.num_vars());
        for (auto& p : probs) p = pd(rng);
        auto c = logic::ground_and_compile(prog, prog.queries[0]);
        auto g = logic::wmc_grad(c, probs);
        const double h = 1e-6;
        for (auto v : c.used_vars) {
            auto hi = probs, lo = probs;
            hi[v] += h;
            lo[v] -= h;
            double fd = (logic::wmc(c, hi) - logic::wmc(c, lo)) / (2 * h);
            double denom = std::max(1.0, std::abs(fd));
            CHECK(std::abs(g[v] - fd) / denom < 1e-5);
        }
    }
}

TEST_CASE("multilinearity: P is affine in each variable") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pd(0.1, 0.9);
    auto prog = logic::parse_program(random_program(rng));
    auto c = logic::ground_and_compile(prog, prog.queries[0]);
    std::vector<double> probs(prog.num_vars());
    for (auto& p : probs) p = pd(rng);
    for (auto v : c.used_vars) {
        auto at = [&](double pv) {
            auto q = probs;
            q[v] = pv;
            return logic::wmc(c, q);
        };
        CHECK(at(0.5) == Approx(0.5 * (at(0.0) + at(1.0))).margin(1e-12));
    }
}

TEST_CASE("canonical HAR program") {
    auto tree = canonical_tree();
    auto src = emit_program(tree);
    auto prog = logic::parse_program(src);
    CHECK(prog.nads.size() == 6);
    CHECK(prog.rules.size() == 7);
    CHECK(prog.queries.size() == 7);

    SECTION("round-trips byte-identically through the parser") {
        CHECK(logic::program_to_string(prog) == src);
    }

    SECTION("wave circuit is an AND of two leaves; walk uses three") {
        auto wave = logic::ground_and_compile(prog, "activity(X, wave)");
        CHECK(wave.used_vars.size() == 2);
        auto walk = logic::ground_and_compile(prog, "activity(X, walk)");
        CHECK(walk.used_vars.size() == 3);
    }

    SECTION("activity probabilities sum to 1 for random softmax-tied nets") {
        std::mt19937_64 rng(321);
        std::uniform_real_distribution<double> pd(0.0, 1.0);
        std::array<logic::Circuit, kNumActivities> circuits;
        for (std::size_t a = 0; a < kNumActivities; ++a)
            circuits[a] = logic::ground_and_compile(prog, "activity(X, " + std::string(kActivityNames[a]) + ")");
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<double> probs(prog.num_vars());
            for (auto& p : probs) p = pd(rng);
            double total = 0.0;
            for (const auto& c : circuits) total += logic::wmc(c, probs);
            CHECK(total == Approx(1.0).margin(1e-9));
        }
    }

    SECTION("hard 0/1 concepts make exactly one activity true") {
        std::mt19937_64 rng(9);
        std::uniform_int_distribution<int> bit(0, 1);
        for (int rep = 0; rep < 64; ++rep) {
            std::vector<double> probs(prog.num_vars());
            for (auto& p : probs) p = bit(rng);
            int ones = 0;
            for (std::size_t a = 0; a < kNumActivities; ++a) {
                auto c = logic::ground_and_compile(prog, "activity(X, " + std::string(kActivityNames[a]) + ")");
                double p = logic::wmc(c, probs);
                if (p > 0.5) ++ones;
            }
            CHECK(ones == 1);
        }
    }
}

TEST_CASE("monotonicity in positive-only leaves") {
    auto prog = logic::parse_program("0.3::p. 0.4::q. goal :- p, q. goal :- p. query(goal).");
    auto c = logic::ground_and_compile(prog, prog.queries[0]);
    double prev = -1.0;
    for (double pv = 0.0; pv <= 1.0; pv += 0.1) {
        double val = logic::wmc(c, std::vector<double>{pv, 0.4});
        CHECK(val >= prev - 1e-12);
        prev = val;
    }
}

TEST_CASE("satisfiable positive conjunction with all probabilities 1") {
    auto prog = logic::parse_program("1.0::p. 1.0::q. goal :- p, q. query(goal).");
    auto c = logic::ground_and_compile(prog, prog.queries[0]);
    CHECK(logic::wmc(c, prog.default_leaf_probs()) == Approx(1.0));
}

TEST_CASE("too many variables is rejected") {
    std::string src;
    for (int i = 0; i < 21; ++i) src += "0.5::f" + std::to_string(i) + ".\n";
    src += "goal :- f0";
    for (int i = 1; i < 21; ++i) src += ", f" + std::to_string(i);
    src += ".\nquery(goal).\n";
    auto prog = logic::parse_program(src);
    CHECK_THROWS_AS(logic::ground_and_compile(prog, prog.queries[0]), logic::TooManyWorlds);
}
