#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invbayes/autodiff/graph.hpp"
#include "invbayes/random.hpp"

namespace invbayes::nets {

using ad::Graph;
using ad::NamedTensors;
using ad::NodeId;
using ad::Tensor;

enum class Activation { relu, tanh };

const char* to_string(Activation a);
Activation parse_activation(std::string_view name);

NodeId activate(Graph& g, NodeId x, Activation a);

/**
 * Fully connected stack in -> widths[0] -> ... -> widths.back(). Weights are
 * named `<prefix>.W<l>` ([in x out]) and `<prefix>.b<l>` ([1 x out]). Every
 * layer is followed by the activation except the last one, unless
 * `activate_output` is set.
 */
struct DenseStack {
    std::string prefix;
    std::size_t in = 1;
    std::vector<std::size_t> widths;
    Activation activation = Activation::relu;
    bool activate_output = false;

    std::size_t out() const { return widths.empty() ? in : widths.back(); }

    /// He-uniform (ReLU) or Xavier-uniform (tanh) weights, zero biases.
    void init(NamedTensors& params, Rng& rng) const;
    NodeId build(Graph& g, NodeId x) const;
};

/**
 * phi_j(tau) = ReLU(sum_{i=0}^{n-1} cos(pi i tau) w_ij + b_j), weights named
 * `<prefix>.W` ([n x width]) and `<prefix>.b` ([1 x width]).
 */
struct CosineEmbedding {
    std::string prefix = "phi";
    std::size_t n_frequencies = 64;
    std::size_t width = 64;

    void init(NamedTensors& params, Rng& rng) const;
    /// tau is a [batch x 1] node.
    NodeId build(Graph& g, NodeId tau) const;

    /// Direct evaluation for a batch of levels; throws std::domain_error when
    /// a level lies outside [0, 1].
    Tensor embed(const NamedTensors& params, std::span<const double> taus) const;
};

/// Throws std::domain_error unless every level lies in [0, 1].
void check_levels(std::span<const double> taus);

}  // namespace invbayes::nets
