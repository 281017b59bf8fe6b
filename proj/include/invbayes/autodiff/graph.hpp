#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "invbayes/autodiff/tensor.hpp"

namespace invbayes::ad {

using NodeId = std::size_t;

enum class OpKind {
    input,
    constant,
    matmul,
    add,
    mul,
    relu,
    tanh,
    cos,
    mean,
    square,
    abs,
    maximum,
    scale,
};

const char* op_name(OpKind kind);

/// Name -> tensor bindings for one forward pass. Bound tensors are copied into
/// the graph, so they only need to outlive the forward() call.
class Bindings {
public:
    Bindings& bind(std::string_view name, const Tensor& value);
    Bindings& bind_all(const NamedTensors& values);
    const Tensor* find(std::string_view name) const;

private:
    std::vector<std::pair<std::string, const Tensor*>> entries_;
};

/**
 * Static computation graph with reverse-mode differentiation.
 *
 * Nodes are appended in construction order, which is a topological order by
 * construction. Every learnable weight and every data column enters the graph
 * as a named input; backward() returns gradients for the named inputs that
 * were declared with requires_grad.
 *
 * forward() may be called repeatedly with different bindings (and batch
 * sizes); node buffers are reused when shapes repeat.
 */
class Graph {
public:
    /// Declares a named input. Re-declaring an existing name returns the same
    /// node, which is how sub-networks share weights.
    NodeId input(std::string_view name, bool requires_grad = true);
    NodeId constant(Tensor value);

    NodeId matmul(NodeId a, NodeId b);
    /// Elementwise add; b may be a single row broadcast over a's rows, or a
    /// one-element tensor broadcast everywhere.
    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId relu(NodeId a);
    NodeId tanh(NodeId a);
    NodeId cos(NodeId a);
    NodeId mean(NodeId a);
    NodeId square(NodeId a);
    NodeId abs(NodeId a);
    NodeId maximum(NodeId a, NodeId b);
    NodeId scale(NodeId a, double factor);

    NodeId sub(NodeId a, NodeId b) { return add(a, scale(b, -1.0)); }

    const Tensor& forward(const Bindings& inputs, NodeId output);

    /// Gradient of a one-element output with respect to every named input.
    NamedTensors backward();
    NamedTensors backward(const Tensor& output_adjoint);

    const Tensor& value(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }
    OpKind kind(NodeId id) const { return nodes_.at(id).kind; }

    /// Hash of every branch taken by the non-smooth ops (relu, abs, maximum)
    /// in the last forward pass. Two passes with equal signatures traverse the
    /// same smooth piece of the function.
    std::uint64_t branch_signature() const;

private:
    struct Node {
        OpKind kind = OpKind::input;
        NodeId a = 0;
        NodeId b = 0;
        double factor = 1.0;
        std::string name;
        bool requires_grad = false;
        bool needs_grad = false;
        Tensor value;
        Tensor grad;
    };

    NodeId push(Node node);
    void evaluate(Node& node);
    void propagate(const Node& node);
    const std::vector<NodeId>& schedule_for(NodeId output);

    std::vector<Node> nodes_;
    std::unordered_map<std::string, NodeId> by_name_;
    std::unordered_map<NodeId, std::vector<NodeId>> schedules_;
    NodeId last_output_ = 0;
    bool has_forward_ = false;
};

}  // namespace invbayes::ad
