#include "invbayes/nets/layers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace invbayes::nets {

const char* to_string(Activation a) {
    return a == Activation::relu ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "' (expected relu or tanh)");
}

NodeId activate(Graph& g, NodeId x, Activation a) {
    return a == Activation::relu ? g.relu(x) : g.tanh(x);
}

void DenseStack::init(NamedTensors& params, Rng& rng) const {
    std::size_t fan_in = in;
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const std::size_t fan_out = widths[l];
        const double limit = activation == Activation::relu
                                 ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                 : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Tensor w({fan_in, fan_out});
        for (auto& v : w.data()) v = rng.uniform(-limit, limit);
        params[prefix + ".W" + std::to_string(l)] = std::move(w);
        params[prefix + ".b" + std::to_string(l)] = Tensor({1, fan_out});
        fan_in = fan_out;
    }
}

NodeId DenseStack::build(Graph& g, NodeId x) const {
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const auto w = g.input(prefix + ".W" + std::to_string(l));
        const auto b = g.input(prefix + ".b" + std::to_string(l));
        x = g.add(g.matmul(x, w), b);
        if (l + 1 < widths.size() || activate_output) x = activate(g, x, activation);
    }
    return x;
}

namespace {

Tensor frequency_row(std::size_t n) {
    Tensor f({1, n});
    for (std::size_t i = 0; i < n; ++i) f[i] = std::numbers::pi * static_cast<double>(i);
    return f;
}

}  // namespace

void CosineEmbedding::init(NamedTensors& params, Rng& rng) const {
    DenseStack{prefix, n_frequencies, {width}, Activation::relu, true}.init(params, rng);
    params[prefix + ".W"] = std::move(params[prefix + ".W0"]);
    params[prefix + ".b"] = std::move(params[prefix + ".b0"]);
    params.erase(prefix + ".W0");
    params.erase(prefix + ".b0");
}

NodeId CosineEmbedding::build(Graph& g, NodeId tau) const {
    const auto freq = g.constant(frequency_row(n_frequencies));
    const auto features = g.cos(g.matmul(tau, freq));
    const auto w = g.input(prefix + ".W");
    const auto b = g.input(prefix + ".b");
    return g.relu(g.add(g.matmul(features, w), b));
}

void check_levels(std::span<const double> taus) {
    for (double t : taus) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("quantile level outside [0, 1]");
    }
}

Tensor CosineEmbedding::embed(const NamedTensors& params, std::span<const double> taus) const {
    check_levels(taus);
    Graph g;
    const auto tau = g.input("tau", false);
    const auto out = build(g, tau);
    const Tensor t({taus.size(), 1}, std::vector<double>(taus.begin(), taus.end()));
    ad::Bindings b;
    b.bind_all(params).bind("tau", t);
    return g.forward(b, out);
}

}  // namespace invbayes::nets
