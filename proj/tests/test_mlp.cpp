#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "harlog/mlp.hpp"

using namespace harlog;
using Catch::Approx;

TEST_CASE("param_count matches the per-layer formula") {
    CHECK(param_count({4, {8, 8}, 2}) == 130);
    CHECK(param_count({16, {8, 8}, 2}) == 226);
    CHECK(param_count({4, {8, 8}, 7}) == 175);
    CHECK(param_count({16, {8, 8}, 7}) == 271);
    CHECK(param_count({4, {22, 22}, 7}) == 777);
}

TEST_CASE("param_count matches a brute-force count of stored scalars") {
    Rng rng(1);
    for (const MlpSpec& spec :
         {MlpSpec{4, {8, 8}, 2}, MlpSpec{16, {8, 8}, 2}, MlpSpec{3, {5}, 4}, MlpSpec{2, {}, 2}}) {
        auto mlp = make_mlp(spec, rng);
        CHECK(mlp.num_params() == param_count(spec));
    }
}

TEST_CASE("forward softmax properties") {
    Rng rng(42);
    SECTION("zero parameters give a uniform distribution") {
        auto mlp = make_mlp({4, {8, 8}, 5}, rng);
        for (auto& l : mlp.layers) {
            std::fill(l.w.begin(), l.w.end(), 0.0);
            std::fill(l.b.begin(), l.b.end(), 0.0);
        }
        auto out = forward(mlp, std::vector<double>{1.0, -2.0, 0.5, 3.0});
        for (double p : out) CHECK(p == Approx(0.2));
    }
    SECTION("outputs are positive and sum to 1") {
        std::normal_distribution<double> xs(0.0, 3.0);
        for (int rep = 0; rep < 1000; ++rep) {
            auto mlp = make_mlp({4, {8, 8}, 2}, rng);
            std::vector<double> x(4);
            for (auto& v : x) v = xs(rng);
            auto out = forward(mlp, x);
            double sum = 0.0;
            for (double p : out) {
                // extreme logits can round a component to exactly 0 or 1
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
                sum += p;
            }
            CHECK(sum == Approx(1.0).margin(1e-12));
        }
    }
    SECTION("deterministic given the seed") {
        Rng a(7), b(7);
        auto m1 = make_mlp({4, {8, 8}, 2}, a);
        auto m2 = make_mlp({4, {8, 8}, 2}, b);
        std::vector<double> x{0.3, -0.7, 1.1, 0.0};
        auto o1 = forward(m1, x);
        auto o2 = forward(m2, x);
        CHECK(o1[0] == o2[0]);
        CHECK(o1[1] == o2[1]);
    }
    SECTION("dimension mismatch rejected") {
        auto mlp = make_mlp({4, {8}, 2}, rng);
        CHECK_THROWS_AS(forward(mlp, std::vector<double>{1.0, 2.0}), DomainError);
    }
}

TEST_CASE("backward matches central finite differences on every parameter") {
    Rng rng(123);
    auto mlp = make_mlp({4, {8, 8}, 3}, rng);
    std::vector<double> x{0.5, -1.2, 0.8, 2.0};
    // scalar loss: weighted sum of outputs
    std::vector<double> upstream{0.7, -0.4, 1.3};
    auto loss = [&](const Mlp& m) {
        auto out = forward(m, x);
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) s += upstream[i] * out[i];
        return s;
    };
    auto tr = forward_trace(mlp, x);
    auto g = backward(mlp, tr, upstream);
    const double h = 1e-5;
    for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
        auto check_param = [&](std::vector<double>& params, const std::vector<double>& grads) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                double saved = params[i];
                params[i] = saved + h;
                double hi = loss(mlp);
                params[i] = saved - h;
                double lo = loss(mlp);
                params[i] = saved;
                double fd = (hi - lo) / (2 * h);
                double denom = std::max(1e-4, std::abs(fd));
                CHECK(std::abs(grads[i] - fd) / denom < 1e-4);
            }
        };
        check_param(mlp.layers[li].w, g.layers[li].w);
        check_param(mlp.layers[li].b, g.layers[li].b);
    }
    SECTION("input gradient too") {
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            auto at = [&](const std::vector<double>& xx) {
                auto out = forward(mlp, xx);
                double s = 0.0;
                for (std::size_t k = 0; k < out.size(); ++k) s += upstream[k] * out[k];
                return s;
            };
            double fd = (at(xp) - at(xm)) / (2 * h);
            CHECK(g.input[i] == Approx(fd).margin(1e-6));
        }
    }
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    Rng rng(5);
    auto mlp = make_mlp({4, {8, 8}, 2}, rng);
    std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    auto tr = forward_trace(mlp, x);
    auto g = backward(mlp, tr, std::vector<double>{0.0, 0.0});
    for (const auto& l : g.layers) {
        for (double v : l.w) CHECK(v == 0.0);
        for (double v : l.b) CHECK(v == 0.0);
    }
}

TEST_CASE("dead ReLU units block gradient") {
    Rng rng(6);
    auto mlp = make_mlp({2, {2}, 2}, rng);
    // force the first hidden unit dead for this input
    mlp.layers[0].weight(0, 0) = -10.0;
    mlp.layers[0].weight(0, 1) = -10.0;
    mlp.layers[0].b[0] = -5.0;
    std::vector<double> x{1.0, 1.0};
    auto tr = forward_trace(mlp, x);
    auto g = backward(mlp, tr, std::vector<double>{1.0, -1.0});
    CHECK(g.layers[0].weight(0, 0) == 0.0);
    CHECK(g.layers[0].weight(0, 1) == 0.0);
    CHECK(g.layers[0].b[0] == 0.0);
}

TEST_CASE("adam optimizer") {
    SECTION("zero gradient leaves parameters unchanged") {
        Rng rng(8);
        auto mlp = make_mlp({2, {3}, 2}, rng);
        auto before = mlp.layers;
        Adam opt;
        opt.step(mlp, zero_gradients(mlp));
        for (std::size_t li = 0; li < mlp.layers.size(); ++li)
            for (std::size_t i = 0; i < mlp.layers[li].w.size(); ++i)
                CHECK(mlp.layers[li].w[i] == before[li].w[i]);
    }
    SECTION("one step on a quadratic decreases the loss") {
        // single parameter theta, loss = (theta - 3)^2, gradient = 2(theta - 3)
        Mlp mlp;
        mlp.spec = {1, {}, 1};
        Layer l;
        l.in = 1;
        l.out = 1;
        l.w = {0.0};
        l.b = {0.0};
        mlp.layers = {l};
        auto loss = [&] { return (mlp.layers[0].w[0] - 3.0) * (mlp.layers[0].w[0] - 3.0); };
        double before = loss();
        Gradients g = zero_gradients(mlp);
        g.layers[0].w[0] = 2.0 * (mlp.layers[0].w[0] - 3.0);
        Adam opt;
        opt.step(mlp, g);
        CHECK(loss() < before);
    }
    SECTION("non-finite gradient rejected") {
        Rng rng(9);
        auto mlp = make_mlp({2, {3}, 2}, rng);
        auto g = zero_gradients(mlp);
        g.layers[0].w[0] = std::nan("");
        Adam opt;
        CHECK_THROWS_AS(opt.step(mlp, g), NonFiniteGradient);
    }
    SECTION("identical seeds give identical parameters after identical steps") {
        auto run = [] {
            Rng rng(99);
            auto mlp = make_mlp({3, {4}, 2}, rng);
            Adam opt;
            std::normal_distribution<double> noise(0.0, 1.0);
            for (int i = 0; i < 20; ++i) {
                auto g = zero_gradients(mlp);
                for (auto& l : g.layers)
                    for (auto& v : l.w) v = noise(rng);
                opt.step(mlp, g);
            }
            return mlp;
        };
        auto a = run(), b = run();
        for (std::size_t li = 0; li < a.layers.size(); ++li)
            for (std::size_t i = 0; i < a.layers[li].w.size(); ++i)
                CHECK(a.layers[li].w[i] == b.layers[li].w[i]);
    }
}

TEST_CASE("mlp JSON round-trip is exact") {
    Rng rng(77);
    auto mlp = make_mlp({4, {8, 8}, 2}, rng);
    auto back = mlp_from_json(mlp_to_json(mlp));
    REQUIRE(back.layers.size() == mlp.layers.size());
    for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
        for (std::size_t i = 0; i < mlp.layers[li].w.size(); ++i)
            CHECK(back.layers[li].w[i] == mlp.layers[li].w[i]);
        for (std::size_t i = 0; i < mlp.layers[li].b.size(); ++i)
            CHECK(back.layers[li].b[i] == mlp.layers[li].b[i]);
    }
}
