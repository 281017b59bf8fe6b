#include <doctest.h>

#include <cmath>
#include <limits>

#include "gradcheck.hpp"
#include "invbayes/autodiff/adam.hpp"
#include "invbayes/autodiff/graph.hpp"
#include "invbayes/random.hpp"

using namespace invbayes;
using ad::Graph;
using ad::NamedTensors;
using ad::Tensor;

namespace {

Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols) {
    Tensor t({rows, cols});
    for (auto& v : t.data()) v = rng.uniform(-1.5, 1.5);
    return t;
}

double scalar_forward(Graph& g, ad::NodeId out, const NamedTensors& inputs) {
    ad::Bindings b;
    b.bind_all(inputs);
    return g.forward(b, out).item();
}

}  // namespace

TEST_CASE("forward evaluates square, relu and matmul") {
    Graph g;
    auto x = g.input("x");
    auto sq = g.square(x);
    auto r = g.relu(x);
    NamedTensors in{{"x", Tensor::scalar(3.0)}};
    CHECK(scalar_forward(g, sq, in) == 9.0);
    in["x"] = Tensor::scalar(-2.0);
    CHECK(scalar_forward(g, r, in) == 0.0);

    Graph h;
    auto w = h.input("W");
    auto v = h.input("x");
    auto prod = h.matmul(v, w);
    ad::Bindings b;
    Tensor eye = Tensor::identity(2);
    Tensor row = Tensor::row({1.0, 2.0});
    b.bind("W", eye).bind("x", row);
    const auto& out = h.forward(b, prod);
    CHECK(out.at(0, 0) == 1.0);
    CHECK(out.at(0, 1) == 2.0);
}

TEST_CASE("backward gives the power rule and an inactive relu") {
    Graph g;
    auto x = g.input("x");
    auto sq = g.square(x);
    ad::Bindings b;
    Tensor three = Tensor::scalar(3.0);
    b.bind("x", three);
    g.forward(b, sq);
    CHECK(g.backward().at("x").item() == 6.0);

    Graph h;
    auto y = h.input("x");
    auto r = h.relu(y);
    ad::Bindings c;
    Tensor minus_one = Tensor::scalar(-1.0);
    c.bind("x", minus_one);
    h.forward(c, r);
    CHECK(h.backward().at("x").item() == 0.0);
}

TEST_CASE("relu subgradient at zero is zero") {
    Graph g;
    auto x = g.input("x");
    auto r = g.relu(x);
    ad::Bindings b;
    Tensor zero = Tensor::scalar(0.0);
    b.bind("x", zero);
    g.forward(b, r);
    CHECK(g.backward().at("x").item() == 0.0);
}

TEST_CASE("every op matches central differences on random tensors") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        NamedTensors in{{"a", random_tensor(rng, 3, 4)},
                        {"b", random_tensor(rng, 3, 4)},
                        {"m", random_tensor(rng, 4, 2)},
                        {"r", random_tensor(rng, 1, 4)},
                        {"s", random_tensor(rng, 1, 1)},
                        {"c", random_tensor(rng, 3, 4)}};
        auto check = [&](const char* label, auto build) {
            Graph g;
            auto a = g.input("a");
            auto b = g.input("b");
            const auto out = build(g, a, b);
            auto res = testing::gradient_check(g, out, in);
            INFO(label << " worst " << res.worst << " seed " << seed);
            CHECK(res.checked > 0);
            CHECK(res.max_rel_error < 1e-4);
        };
        auto weighted = [](Graph& g, ad::NodeId x) { return g.mean(g.mul(x, g.input("c", false))); };
        check("add", [&](Graph& g, auto a, auto b) { return weighted(g, g.add(a, b)); });
        check("add row broadcast", [&](Graph& g, auto a, auto) { return weighted(g, g.add(a, g.input("r"))); });
        check("add scalar broadcast", [&](Graph& g, auto a, auto) { return weighted(g, g.add(a, g.input("s"))); });
        check("mul", [&](Graph& g, auto a, auto b) { return weighted(g, g.mul(a, b)); });
        check("relu", [&](Graph& g, auto a, auto) { return weighted(g, g.relu(a)); });
        check("tanh", [&](Graph& g, auto a, auto) { return weighted(g, g.tanh(a)); });
        check("cos", [&](Graph& g, auto a, auto) { return weighted(g, g.cos(a)); });
        check("square", [&](Graph& g, auto a, auto) { return weighted(g, g.square(a)); });
        check("abs", [&](Graph& g, auto a, auto) { return weighted(g, g.abs(a)); });
        check("maximum", [&](Graph& g, auto a, auto b) { return weighted(g, g.maximum(a, b)); });
        check("scale", [&](Graph& g, auto a, auto) { return weighted(g, g.scale(a, -2.5)); });
        check("mean", [&](Graph& g, auto a, auto) { return g.mean(g.square(a)); });
        check("matmul", [&](Graph& g, auto a, auto) {
            auto p = g.matmul(a, g.input("m"));
            return g.mean(g.square(p));
        });
    }
}

TEST_CASE("forward is pure and reuses buffers across batch sizes") {
    Graph g;
    auto x = g.input("x");
    auto out = g.mean(g.tanh(g.scale(x, 2.0)));
    Rng rng(3);
    NamedTensors small{{"x", random_tensor(rng, 2, 3)}};
    NamedTensors large{{"x", random_tensor(rng, 5, 3)}};
    const double first = scalar_forward(g, out, small);
    scalar_forward(g, out, large);
    CHECK(scalar_forward(g, out, small) == first);
}

TEST_CASE("shape mismatches and non-finite values are reported") {
    Graph g;
    auto a = g.input("a");
    auto b = g.input("b");
    auto sum = g.add(a, b);
    ad::Bindings bind;
    Tensor x({2, 3}, 1.0);
    Tensor y({3, 2}, 1.0);
    bind.bind("a", x).bind("b", y);
    CHECK_THROWS_AS(g.forward(bind, sum), ad::ShapeError);

    Graph h;
    auto u = h.input("u");
    auto sq = h.square(u);
    ad::Bindings big;
    Tensor huge = Tensor::scalar(1e300);
    big.bind("u", huge);
    CHECK_THROWS_AS(h.forward(big, sq), ad::NumericalError);
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
    ad::AdamState state(ad::AdamConfig{0.1});
    NamedTensors params{{"w", Tensor::row({1.0, -2.0, 3.0})}};
    const auto before = params;
    NamedTensors grads{{"w", Tensor({1, 3}, 0.0)}};
    for (int i = 0; i < 5; ++i) ad::adam_step(state, params, grads);
    CHECK(params == before);
}

TEST_CASE("adam first step with unit gradient moves by the learning rate") {
    ad::AdamState state(ad::AdamConfig{0.1});
    NamedTensors params{{"w", Tensor::scalar(1.0)}};
    NamedTensors grads{{"w", Tensor::scalar(1.0)}};
    ad::adam_step(state, params, grads);
    // m_hat = 1, v_hat = 1, so the step is 0.1 / (1 + 1e-8).
    CHECK(params.at("w").item() == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-15));
    CHECK(state.step() == 1);
}

TEST_CASE("adam matches a hand-rolled recursion over several steps") {
    const ad::AdamConfig cfg{0.05, 0.9, 0.999, 1e-8};
    ad::AdamState state(cfg);
    NamedTensors params{{"w", Tensor::scalar(0.5)}};
    double w = 0.5, m = 0.0, v = 0.0;
    for (int t = 1; t <= 6; ++t) {
        const double grad = std::sin(t) + 0.3;
        NamedTensors grads{{"w", Tensor::scalar(grad)}};
        ad::adam_step(state, params, grads);
        m = cfg.beta1 * m + (1 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1 - cfg.beta2) * grad * grad;
        const double mh = m / (1 - std::pow(cfg.beta1, t));
        const double vh = v / (1 - std::pow(cfg.beta2, t));
        w -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
    }
    CHECK(params.at("w").item() == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("two identical adam runs are bit-identical") {
    auto run = [] {
        Rng rng(42);
        ad::AdamState state;
        NamedTensors params{{"w", random_tensor(rng, 2, 2)}};
        for (int i = 0; i < 10; ++i) {
            NamedTensors grads{{"w", random_tensor(rng, 2, 2)}};
            ad::adam_step(state, params, grads);
        }
        return params;
    };
    CHECK(run() == run());
}

TEST_CASE("split streams are reproducible and distinct") {
    Rng a(7), b(7);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(Rng(7).split(1).next_u64() != Rng(7).split(2).next_u64());
    CHECK(stage_seed(7, 1) == stage_seed(7, 1));
    CHECK(stage_seed(7, 1) != stage_seed(7, 2));
    Rng u(9);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = u.uniform_open();
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
}
