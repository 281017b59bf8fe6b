#pragma once

#include <cstddef>
#include <span>

#include "invbayes/nets/networks.hpp"

namespace invbayes::nets {

/// rho_tau(u) = max(u tau, u (tau - 1)).
double pinball_loss(double u, double tau);

/// Elementwise pinball of a residual node at a level node of the same shape.
NodeId pinball_node(Graph& g, NodeId residual, NodeId tau);

/**
 * alpha weights the pinball term. crossing_penalty (lambda) weights the
 * non-crossing hinge: over level pairs for the explicit net, and between
 * the drawn level and the median for the implicit net.
 */
struct LossConfig {
    double alpha = 1.0;
    double crossing_penalty = 0.0;

    void validate() const;
};

/**
 * Training-loss graph of an implicit net. Bound inputs: "y" [b x d],
 * "theta" [b x 1], "tau" [b x 1], "tau_half" [b x 1] filled with 0.5 and
 * "side" [b x 1] = +1 where tau < 0.5 and -1 otherwise (used only when
 * lambda > 0). Loss:
 *   alpha * mean rho_tau(theta - f(tau, y)) + mean (theta - f(0.5, y))^2
 *   + lambda * mean relu(side * (f(tau, y) - f(0.5, y))).
 */
struct IqnLossGraph {
    Graph graph;
    NodeId loss = 0;
    NodeId prediction = 0;
};
IqnLossGraph build_iqn_loss(const ImplicitQuantileNet& net, const LossConfig& config);

/// Binds one batch for build_iqn_loss; the returned tensors back the bindings.
struct IqnBatch {
    Tensor y, theta, tau, tau_half, side;
    void bind(ad::Bindings& b) const;
};
IqnBatch make_iqn_batch(std::span<const double> y, std::size_t input_dim, std::span<const double> theta,
                        std::span<const double> tau);

/// Combined loss on one batch; throws std::invalid_argument when empty.
double combined_loss(const ImplicitQuantileNet& net, std::span<const double> y, std::span<const double> theta,
                     std::span<const double> tau, const LossConfig& config);

/**
 * Multi-quantile loss graph. Bound inputs: "y" [b x d], "theta" [b x 1].
 *   (1/NK) sum_n sum_k rho_{tau_k}(theta_n - f_k(y_n))
 *   + lambda (1/N) sum_n sum_{i<j} relu(f_i(y_n) - f_j(y_n)).
 */
struct ExplicitLossGraph {
    Graph graph;
    NodeId loss = 0;
    NodeId prediction = 0;
};
ExplicitLossGraph build_explicit_loss(const ExplicitQuantileNet& net, const LossConfig& config);

double multi_quantile_loss(const ExplicitQuantileNet& net, std::span<const double> y, std::span<const double> theta,
                           const LossConfig& config);

/// Summary-network loss graph, (1/N) sum_n ||S(y_n) - theta_n||^2. Bound
/// inputs: "y" [b x d], "theta" [b x k].
struct SummaryLossGraph {
    Graph graph;
    NodeId loss = 0;
};
SummaryLossGraph build_summary_loss(const SummaryNet& net);

double summary_loss(const SummaryNet& net, std::span<const double> y, std::span<const double> theta);

}  // namespace invbayes::nets
