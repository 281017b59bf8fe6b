#include "invbayes/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace invbayes::ad {

namespace {

void ensure_shape(Tensor& t, const Shape& shape) {
    if (t.shape() != shape) t = Tensor(shape);
}

bool is_row_broadcast(const Tensor& a, const Tensor& b) {
    return a.rank() == 2 && b.rows() == 1 && b.cols() == a.cols() && a.shape() != b.shape();
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace

const char* op_name(OpKind kind) {
    switch (kind) {
        case OpKind::input: return "input";
        case OpKind::constant: return "constant";
        case OpKind::matmul: return "matmul";
        case OpKind::add: return "add";
        case OpKind::mul: return "mul";
        case OpKind::relu: return "relu";
        case OpKind::tanh: return "tanh";
        case OpKind::cos: return "cos";
        case OpKind::mean: return "mean";
        case OpKind::square: return "square";
        case OpKind::abs: return "abs";
        case OpKind::maximum: return "maximum";
        case OpKind::scale: return "scale";
    }
    return "?";
}

Bindings& Bindings::bind(std::string_view name, const Tensor& value) {
    for (auto& [n, ptr] : entries_) {
        if (n == name) {
            ptr = &value;
            return *this;
        }
    }
    entries_.emplace_back(std::string(name), &value);
    return *this;
}

Bindings& Bindings::bind_all(const NamedTensors& values) {
    for (const auto& [name, t] : values) bind(name, t);
    return *this;
}

const Tensor* Bindings::find(std::string_view name) const {
    for (const auto& [n, ptr] : entries_) {
        if (n == name) return ptr;
    }
    return nullptr;
}

NodeId Graph::push(Node node) {
    nodes_.push_back(std::move(node));
    schedules_.clear();
    has_forward_ = false;
    return nodes_.size() - 1;
}

NodeId Graph::input(std::string_view name, bool requires_grad) {
    if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) {
        return it->second;
    }
    Node n;
    n.kind = OpKind::input;
    n.name = std::string(name);
    n.requires_grad = requires_grad;
    n.needs_grad = requires_grad;
    const auto id = push(std::move(n));
    by_name_.emplace(std::string(name), id);
    return id;
}

NodeId Graph::constant(Tensor value) {
    Node n;
    n.kind = OpKind::constant;
    n.value = std::move(value);
    return push(std::move(n));
}

#define INVBAYES_BINARY(fn, op)                                                  \
    NodeId Graph::fn(NodeId a, NodeId b) {                                       \
        Node n;                                                                  \
        n.kind = op;                                                             \
        n.a = a;                                                                 \
        n.b = b;                                                                 \
        n.needs_grad = nodes_.at(a).needs_grad || nodes_.at(b).needs_grad;       \
        return push(std::move(n));                                               \
    }

#define INVBAYES_UNARY(fn, op)                                                   \
    NodeId Graph::fn(NodeId a) {                                                 \
        Node n;                                                                  \
        n.kind = op;                                                             \
        n.a = a;                                                                 \
        n.needs_grad = nodes_.at(a).needs_grad;                                  \
        return push(std::move(n));                                               \
    }

INVBAYES_BINARY(matmul, OpKind::matmul)
INVBAYES_BINARY(add, OpKind::add)
INVBAYES_BINARY(mul, OpKind::mul)
INVBAYES_BINARY(maximum, OpKind::maximum)
INVBAYES_UNARY(relu, OpKind::relu)
INVBAYES_UNARY(tanh, OpKind::tanh)
INVBAYES_UNARY(cos, OpKind::cos)
INVBAYES_UNARY(mean, OpKind::mean)
INVBAYES_UNARY(square, OpKind::square)
INVBAYES_UNARY(abs, OpKind::abs)

#undef INVBAYES_BINARY
#undef INVBAYES_UNARY

NodeId Graph::scale(NodeId a, double factor) {
    Node n;
    n.kind = OpKind::scale;
    n.a = a;
    n.factor = factor;
    n.needs_grad = nodes_.at(a).needs_grad;
    return push(std::move(n));
}

const std::vector<NodeId>& Graph::schedule_for(NodeId output) {
    if (auto it = schedules_.find(output); it != schedules_.end()) return it->second;
    std::vector<char> needed(nodes_.size(), 0);
    needed[output] = 1;
    for (NodeId id = output + 1; id-- > 0;) {
        if (!needed[id]) continue;
        const auto& n = nodes_[id];
        switch (n.kind) {
            case OpKind::input:
            case OpKind::constant: break;
            case OpKind::matmul:
            case OpKind::add:
            case OpKind::mul:
            case OpKind::maximum: needed[n.a] = needed[n.b] = 1; break;
            default: needed[n.a] = 1; break;
        }
    }
    std::vector<NodeId> order;
    for (NodeId id = 0; id <= output; ++id) {
        if (needed[id]) order.push_back(id);
    }
    return schedules_.emplace(output, std::move(order)).first->second;
}

const Tensor& Graph::forward(const Bindings& inputs, NodeId output) {
    if (output >= nodes_.size()) throw std::out_of_range("forward: unknown node");
    for (NodeId id : schedule_for(output)) {
        auto& n = nodes_[id];
        if (n.kind == OpKind::input) {
            const Tensor* bound = inputs.find(n.name);
            if (!bound) throw std::invalid_argument("forward: input '" + n.name + "' is not bound");
            n.value = *bound;
        } else if (n.kind != OpKind::constant) {
            evaluate(n);
            if (!n.value.all_finite()) {
                throw NumericalError(std::string("non-finite value produced by ") + op_name(n.kind) +
                                     " (node " + std::to_string(id) + ")");
            }
        }
    }
    last_output_ = output;
    has_forward_ = true;
    return nodes_[output].value;
}

void Graph::evaluate(Node& n) {
    const Tensor& a = nodes_[n.a].value;
    Tensor& out = n.value;
    switch (n.kind) {
        case OpKind::matmul: {
            const Tensor& b = nodes_[n.b].value;
            if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
                throw ShapeError("matmul " + to_string(a.shape()) + " x " + to_string(b.shape()));
            }
            const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
            ensure_shape(out, {m, p});
            std::fill(out.data().begin(), out.data().end(), 0.0);
            const double* A = a.data().data();
            const double* B = b.data().data();
            double* C = out.data().data();
            for (std::size_t i = 0; i < m; ++i) {
                double* crow = C + i * p;
                for (std::size_t q = 0; q < k; ++q) {
                    const double av = A[i * k + q];
                    if (av == 0.0) continue;
                    const double* brow = B + q * p;
                    for (std::size_t j = 0; j < p; ++j) crow[j] += av * brow[j];
                }
            }
            break;
        }
        case OpKind::add: {
            const Tensor& b = nodes_[n.b].value;
            ensure_shape(out, a.shape());
            if (a.shape() == b.shape()) {
                for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
            } else if (is_row_broadcast(a, b)) {
                const std::size_t cols = a.cols();
                for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i % cols];
            } else if (b.size() == 1) {
                const double s = b[0];
                for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s;
            } else {
                throw ShapeError("add " + to_string(a.shape()) + " + " + to_string(b.shape()));
            }
            break;
        }
        case OpKind::mul:
        case OpKind::maximum: {
            const Tensor& b = nodes_[n.b].value;
            if (a.shape() != b.shape()) {
                throw ShapeError(std::string(op_name(n.kind)) + " " + to_string(a.shape()) + " vs " +
                                 to_string(b.shape()));
            }
            ensure_shape(out, a.shape());
            if (n.kind == OpKind::mul) {
                for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
            } else {
                for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
            }
            break;
        }
        case OpKind::relu:
            ensure_shape(out, a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
            break;
        case OpKind::tanh:
            ensure_shape(out, a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
            break;
        case OpKind::cos:
            ensure_shape(out, a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::cos(a[i]);
            break;
        case OpKind::square:
            ensure_shape(out, a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * a[i];
            break;
        case OpKind::abs:
            ensure_shape(out, a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i]);
            break;
        case OpKind::scale:
            ensure_shape(out, a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = n.factor * a[i];
            break;
        case OpKind::mean: {
            ensure_shape(out, {1});
            double s = 0.0;
            for (double v : a.data()) s += v;
            out[0] = s / static_cast<double>(a.size());
            break;
        }
        case OpKind::input:
        case OpKind::constant: break;
    }
}

NamedTensors Graph::backward() {
    if (!has_forward_) throw std::logic_error("backward called before forward");
    const Tensor& out = nodes_[last_output_].value;
    if (out.size() != 1) {
        throw ShapeError("backward without adjoint needs a one-element output, got " + to_string(out.shape()));
    }
    return backward(Tensor(out.shape(), 1.0));
}

NamedTensors Graph::backward(const Tensor& output_adjoint) {
    if (!has_forward_) throw std::logic_error("backward called before forward");
    const auto& order = schedule_for(last_output_);
    if (output_adjoint.shape() != nodes_[last_output_].value.shape()) {
        throw ShapeError("output adjoint shape " + to_string(output_adjoint.shape()) + " does not match output " +
                         to_string(nodes_[last_output_].value.shape()));
    }
    for (NodeId id : order) {
        auto& n = nodes_[id];
        if (!n.needs_grad) continue;
        ensure_shape(n.grad, n.value.shape());
        std::fill(n.grad.data().begin(), n.grad.data().end(), 0.0);
    }
    NamedTensors grads;
    if (!nodes_[last_output_].needs_grad) return grads;
    nodes_[last_output_].grad = output_adjoint;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto& n = nodes_[*it];
        if (n.needs_grad) propagate(n);
    }
    for (NodeId id : order) {
        const auto& n = nodes_[id];
        if (n.kind == OpKind::input && n.requires_grad) grads.emplace(n.name, n.grad);
    }
    return grads;
}

void Graph::propagate(const Node& n) {
    if (n.kind == OpKind::input || n.kind == OpKind::constant) return;
    const Tensor& g = n.grad;
    Node& na = nodes_[n.a];
    const Tensor& a = na.value;
    switch (n.kind) {
        case OpKind::matmul: {
            Node& nb = nodes_[n.b];
            const Tensor& b = nb.value;
            const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
            if (na.needs_grad) {
                // dA += dC * B^T
                double* dA = na.grad.data().data();
                const double* G = g.data().data();
                const double* B = b.data().data();
                for (std::size_t i = 0; i < m; ++i) {
                    const double* grow = G + i * p;
                    for (std::size_t q = 0; q < k; ++q) {
                        const double* brow = B + q * p;
                        double s = 0.0;
                        for (std::size_t j = 0; j < p; ++j) s += grow[j] * brow[j];
                        dA[i * k + q] += s;
                    }
                }
            }
            if (nb.needs_grad) {
                // dB += A^T * dC
                double* dB = nb.grad.data().data();
                const double* G = g.data().data();
                const double* A = a.data().data();
                for (std::size_t i = 0; i < m; ++i) {
                    const double* grow = G + i * p;
                    for (std::size_t q = 0; q < k; ++q) {
                        const double av = A[i * k + q];
                        if (av == 0.0) continue;
                        double* dbrow = dB + q * p;
                        for (std::size_t j = 0; j < p; ++j) dbrow[j] += av * grow[j];
                    }
                }
            }
            break;
        }
        case OpKind::add: {
            Node& nb = nodes_[n.b];
            const Tensor& b = nb.value;
            if (na.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += g[i];
            }
            if (nb.needs_grad) {
                if (a.shape() == b.shape()) {
                    for (std::size_t i = 0; i < g.size(); ++i) nb.grad[i] += g[i];
                } else if (is_row_broadcast(a, b)) {
                    const std::size_t cols = a.cols();
                    for (std::size_t i = 0; i < g.size(); ++i) nb.grad[i % cols] += g[i];
                } else {
                    double s = 0.0;
                    for (double v : g.data()) s += v;
                    nb.grad[0] += s;
                }
            }
            break;
        }
        case OpKind::mul: {
            Node& nb = nodes_[n.b];
            const Tensor& b = nb.value;
            if (na.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += g[i] * b[i];
            }
            if (nb.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) nb.grad[i] += g[i] * a[i];
            }
            break;
        }
        case OpKind::maximum: {
            Node& nb = nodes_[n.b];
            const Tensor& b = nb.value;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (a[i] > b[i]) {
                    if (na.needs_grad) na.grad[i] += g[i];
                } else if (nb.needs_grad) {
                    nb.grad[i] += g[i];
                }
            }
            break;
        }
        case OpKind::relu:
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (a[i] > 0.0) na.grad[i] += g[i];
            }
            break;
        case OpKind::tanh:
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = n.value[i];
                na.grad[i] += g[i] * (1.0 - y * y);
            }
            break;
        case OpKind::cos:
            for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] -= g[i] * std::sin(a[i]);
            break;
        case OpKind::square:
            for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += 2.0 * a[i] * g[i];
            break;
        case OpKind::abs:
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (a[i] > 0.0) {
                    na.grad[i] += g[i];
                } else if (a[i] < 0.0) {
                    na.grad[i] -= g[i];
                }
            }
            break;
        case OpKind::scale:
            for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += n.factor * g[i];
            break;
        case OpKind::mean: {
            const double share = g[0] / static_cast<double>(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) na.grad[i] += share;
            break;
        }
        case OpKind::input:
        case OpKind::constant: break;
    }
}

const Tensor& Graph::value(NodeId id) const {
    return nodes_.at(id).value;
}

std::uint64_t Graph::branch_signature() const {
    if (!has_forward_) throw std::logic_error("branch_signature called before forward");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (NodeId id : schedules_.at(last_output_)) {
        const auto& n = nodes_[id];
        const auto& a = nodes_[n.a].value;
        switch (n.kind) {
            case OpKind::relu:
            case OpKind::abs:
                for (std::size_t i = 0; i < a.size(); ++i) h = mix(h, a[i] > 0.0 ? 1 : (a[i] < 0.0 ? 2 : 3));
                break;
            case OpKind::maximum: {
                const auto& b = nodes_[n.b].value;
                for (std::size_t i = 0; i < a.size(); ++i) h = mix(h, a[i] > b[i] ? 1 : (a[i] < b[i] ? 2 : 3));
                break;
            }
            default: break;
        }
    }
    return h;
}

}  // namespace invbayes::ad
