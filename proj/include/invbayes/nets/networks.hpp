#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "invbayes/nets/layers.hpp"

namespace invbayes::nets {

/**
 * Layer widths of a quantile network. `psi_widths.back()` is the width of
 * the product psi(y) * phi(tau) and therefore also the embedding width; the
 * head runs head_widths then a single linear output (or one per level for
 * the explicit net).
 */
struct QuantileArch {
    std::string preset = "small";
    std::size_t input_dim = 1;
    std::size_t n_frequencies = 32;
    std::vector<std::size_t> psi_widths{32};
    std::vector<std::size_t> head_widths{16};
    Activation activation = Activation::relu;

    std::size_t embedding_width() const { return psi_widths.back(); }
    void validate() const;
};

/// "small": 32 frequencies, 32/32/16/1. "traffic": 64 frequencies,
/// 64/64/64/32/1. Throws std::invalid_argument on other names.
QuantileArch preset_arch(std::string_view preset, std::size_t input_dim);
std::vector<std::string_view> preset_names();

nlohmann::json arch_to_json(const QuantileArch& arch);
QuantileArch arch_from_json(const nlohmann::json& j);

/// Row-major [rows x cols] tensor from a flat span.
Tensor batch_tensor(std::span<const double> flat, std::size_t cols);

/// f(tau, y) = g(psi(y) * phi(tau)).
class ImplicitQuantileNet {
public:
    ImplicitQuantileNet() = default;
    ImplicitQuantileNet(QuantileArch arch, std::uint64_t seed);

    const QuantileArch& arch() const { return arch_; }
    NamedTensors& params() { return params_; }
    const NamedTensors& params() const { return params_; }

    DenseStack psi() const;
    CosineEmbedding phi() const;
    DenseStack head() const;

    /// y: [b x input_dim] node, tau: [b x 1] node; returns [b x 1].
    NodeId build(Graph& g, NodeId y, NodeId tau) const;

    /// One prediction per (y row, tau) pair; y holds taus.size() rows. Builds
    /// a private graph, so concurrent calls on a frozen net are safe.
    std::vector<double> predict(std::span<const double> y, std::span<const double> taus) const;

    /// Every tau evaluated at one conditioning vector.
    std::vector<double> quantiles(std::span<const double> y, std::span<const double> taus) const;

private:
    QuantileArch arch_;
    NamedTensors params_;
};

/// Shared trunk over y and one output per fixed level tau_1 < ... < tau_K.
class ExplicitQuantileNet {
public:
    ExplicitQuantileNet() = default;
    ExplicitQuantileNet(QuantileArch arch, std::vector<double> levels, std::uint64_t seed);

    const QuantileArch& arch() const { return arch_; }
    const std::vector<double>& levels() const { return levels_; }
    NamedTensors& params() { return params_; }
    const NamedTensors& params() const { return params_; }

    DenseStack trunk() const;

    /// y: [b x input_dim] node; returns [b x K].
    NodeId build(Graph& g, NodeId y) const;

    /// [rows x K] predictions, row-major.
    std::vector<double> predict(std::span<const double> y) const;

private:
    QuantileArch arch_;
    std::vector<double> levels_;
    NamedTensors params_;
};

/// Throws std::invalid_argument unless levels are strictly increasing in (0, 1).
void check_explicit_levels(std::span<const double> levels);

/// MLP approximating E[theta | y]; output width equals the parameter dimension.
class SummaryNet {
public:
    SummaryNet() = default;
    SummaryNet(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t output_dim, Activation activation,
               std::uint64_t seed);

    std::size_t input_dim() const { return stack_.in; }
    std::size_t output_dim() const { return stack_.out(); }
    const DenseStack& stack() const { return stack_; }
    NamedTensors& params() { return params_; }
    const NamedTensors& params() const { return params_; }

    NodeId build(Graph& g, NodeId y) const { return stack_.build(g, y); }
    std::vector<double> predict(std::span<const double> y) const;

private:
    DenseStack stack_;
    NamedTensors params_;
};

}  // namespace invbayes::nets
