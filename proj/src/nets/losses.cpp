#include "invbayes/nets/losses.hpp"

#include <algorithm>
#include <stdexcept>

namespace invbayes::nets {

double pinball_loss(double u, double tau) {
    return std::max(u * tau, u * (tau - 1.0));
}

NodeId pinball_node(Graph& g, NodeId residual, NodeId tau) {
    const auto tau_minus_one = g.add(tau, g.constant(Tensor::scalar(-1.0)));
    return g.maximum(g.mul(residual, tau), g.mul(residual, tau_minus_one));
}

void LossConfig::validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("loss alpha must be nonnegative");
    if (!(crossing_penalty >= 0.0)) throw std::invalid_argument("crossing penalty must be nonnegative");
}

IqnLossGraph build_iqn_loss(const ImplicitQuantileNet& net, const LossConfig& config) {
    config.validate();
    IqnLossGraph out;
    auto& g = out.graph;
    const auto y = g.input("y", false);
    const auto theta = g.input("theta", false);
    const auto tau = g.input("tau", false);
    const auto tau_half = g.input("tau_half", false);

    const auto f_tau = net.build(g, y, tau);
    const auto f_half = net.build(g, y, tau_half);
    out.prediction = f_tau;

    NodeId loss = g.mean(g.square(g.sub(theta, f_half)));
    if (config.alpha > 0.0) {
        const auto pin = g.mean(pinball_node(g, g.sub(theta, f_tau), tau));
        loss = g.add(g.scale(pin, config.alpha), loss);
    }
    if (config.crossing_penalty > 0.0) {
        const auto side = g.input("side", false);
        const auto hinge = g.mean(g.relu(g.mul(side, g.sub(f_tau, f_half))));
        loss = g.add(loss, g.scale(hinge, config.crossing_penalty));
    }
    out.loss = loss;
    return out;
}

void IqnBatch::bind(ad::Bindings& b) const {
    b.bind("y", y).bind("theta", theta).bind("tau", tau).bind("tau_half", tau_half).bind("side", side);
}

IqnBatch make_iqn_batch(std::span<const double> y, std::size_t input_dim, std::span<const double> theta,
                        std::span<const double> tau) {
    const std::size_t n = theta.size();
    if (n == 0) throw std::invalid_argument("loss needs a nonempty batch");
    if (tau.size() != n || y.size() != n * input_dim) {
        throw ad::ShapeError("batch fields disagree on the number of records");
    }
    check_levels(tau);
    IqnBatch b;
    b.y = batch_tensor(y, input_dim);
    b.theta = Tensor({n, 1}, std::vector<double>(theta.begin(), theta.end()));
    b.tau = Tensor({n, 1}, std::vector<double>(tau.begin(), tau.end()));
    b.tau_half = Tensor({n, 1}, 0.5);
    b.side = Tensor({n, 1});
    for (std::size_t i = 0; i < n; ++i) b.side[i] = tau[i] < 0.5 ? 1.0 : -1.0;
    return b;
}

double combined_loss(const ImplicitQuantileNet& net, std::span<const double> y, std::span<const double> theta,
                     std::span<const double> tau, const LossConfig& config) {
    auto lg = build_iqn_loss(net, config);
    const auto batch = make_iqn_batch(y, net.arch().input_dim, theta, tau);
    ad::Bindings b;
    b.bind_all(net.params());
    batch.bind(b);
    return lg.graph.forward(b, lg.loss).item();
}

namespace {

Tensor diagonal(std::span<const double> values) {
    Tensor d({values.size(), values.size()});
    for (std::size_t i = 0; i < values.size(); ++i) d.at(i, i) = values[i];
    return d;
}

}  // namespace

ExplicitLossGraph build_explicit_loss(const ExplicitQuantileNet& net, const LossConfig& config) {
    config.validate();
    const auto& levels = net.levels();
    const std::size_t k = levels.size();
    ExplicitLossGraph out;
    auto& g = out.graph;
    const auto y = g.input("y", false);
    const auto theta = g.input("theta", false);
    const auto f = net.build(g, y);
    out.prediction = f;

    const auto residual = g.sub(g.matmul(theta, g.constant(Tensor({1, k}, 1.0))), f);
    std::vector<double> below(k);
    for (std::size_t i = 0; i < k; ++i) below[i] = levels[i] - 1.0;
    const auto pin = g.maximum(g.matmul(residual, g.constant(diagonal(levels))),
                               g.matmul(residual, g.constant(diagonal(below))));
    NodeId loss = g.mean(pin);
    if (config.alpha != 1.0) loss = g.scale(loss, config.alpha);

    const std::size_t pairs = k * (k - 1) / 2;
    if (config.crossing_penalty > 0.0 && pairs > 0) {
        Tensor diff({k, pairs});
        std::size_t p = 0;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j, ++p) {
                diff.at(i, p) = 1.0;
                diff.at(j, p) = -1.0;
            }
        }
        const auto hinge = g.mean(g.relu(g.matmul(f, g.constant(std::move(diff)))));
        loss = g.add(loss, g.scale(hinge, config.crossing_penalty * static_cast<double>(pairs)));
    }
    out.loss = loss;
    return out;
}

double multi_quantile_loss(const ExplicitQuantileNet& net, std::span<const double> y, std::span<const double> theta,
                           const LossConfig& config) {
    if (theta.empty()) throw std::invalid_argument("loss needs a nonempty batch");
    auto lg = build_explicit_loss(net, config);
    const Tensor yt = batch_tensor(y, net.arch().input_dim);
    if (yt.rows() != theta.size()) throw ad::ShapeError("batch fields disagree on the number of records");
    const Tensor tt({theta.size(), 1}, std::vector<double>(theta.begin(), theta.end()));
    ad::Bindings b;
    b.bind_all(net.params()).bind("y", yt).bind("theta", tt);
    return lg.graph.forward(b, lg.loss).item();
}

SummaryLossGraph build_summary_loss(const SummaryNet& net) {
    SummaryLossGraph out;
    auto& g = out.graph;
    const auto y = g.input("y", false);
    const auto theta = g.input("theta", false);
    const auto err = g.sub(net.build(g, y), theta);
    out.loss = g.scale(g.mean(g.square(err)), static_cast<double>(net.output_dim()));
    return out;
}

double summary_loss(const SummaryNet& net, std::span<const double> y, std::span<const double> theta) {
    if (theta.empty()) throw std::invalid_argument("loss needs a nonempty batch");
    auto lg = build_summary_loss(net);
    const Tensor yt = batch_tensor(y, net.input_dim());
    const Tensor tt = batch_tensor(theta, net.output_dim());
    if (yt.rows() != tt.rows()) throw ad::ShapeError("batch fields disagree on the number of records");
    ad::Bindings b;
    b.bind_all(net.params()).bind("y", yt).bind("theta", tt);
    return lg.graph.forward(b, lg.loss).item();
}

}  // namespace invbayes::nets
