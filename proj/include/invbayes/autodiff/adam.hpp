#pragma once

#include <cstdint>

#include "invbayes/autodiff/tensor.hpp"

namespace invbayes::ad {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam. Moment tensors are created lazily on the first step
/// and must keep matching their parameter's shape afterwards.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(AdamConfig config) : config_(config) {}

    const AdamConfig& config() const { return config_; }
    AdamConfig& config() { return config_; }
    std::uint64_t step() const { return step_; }

    const NamedTensors& first_moments() const { return m_; }
    const NamedTensors& second_moments() const { return v_; }

    /// Applies one update to every parameter that has a gradient.
    void apply(NamedTensors& params, const NamedTensors& grads);

    /// Restores a saved optimizer state (used when resuming training).
    void restore(std::uint64_t step, NamedTensors first, NamedTensors second);

private:
    AdamConfig config_;
    std::uint64_t step_ = 0;
    NamedTensors m_;
    NamedTensors v_;
};

inline void adam_step(AdamState& state, NamedTensors& params, const NamedTensors& grads) {
    state.apply(params, grads);
}

}  // namespace invbayes::ad
