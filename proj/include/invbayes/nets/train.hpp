#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "invbayes/autodiff/adam.hpp"
#include "invbayes/nets/losses.hpp"

namespace invbayes::nets {

/**
 * Minibatch Adam settings. The learning rate follows a cosine schedule from
 * `learning_rate` down to `final_learning_rate` over the epochs of one
 * train call; equal values give a constant rate.
 */
struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    double final_learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::uint64_t seed = 0;

    void validate() const;
    double rate_at(std::size_t epoch) const;
};

nlohmann::json train_config_to_json(const TrainConfig& c);
/// Missing keys keep their defaults; bad values raise ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Optimizer state carried across train calls, so training can be resumed.
struct TrainState {
    ad::AdamState adam;
    std::size_t epochs_done = 0;
};

nlohmann::json tensors_to_json(const NamedTensors& t);
NamedTensors tensors_from_json(const nlohmann::json& j);
nlohmann::json train_state_to_json(const TrainState& s);
TrainState train_state_from_json(const nlohmann::json& j);

/**
 * Row-major training columns. `inputs` holds rows of width input_dim,
 * `targets` rows of width target_dim, and `tau` (implicit nets only) one
 * stored level per record.
 */
struct TrainData {
    std::span<const double> inputs;
    std::size_t input_dim = 1;
    std::span<const double> targets;
    std::size_t target_dim = 1;
    std::span<const double> tau;

    std::size_t size() const { return target_dim == 0 ? 0 : targets.size() / target_dim; }
    void validate() const;
};

/**
 * Trains an implicit net with the combined loss. Records are reshuffled each
 * epoch; each record gets a fresh uniform level per epoch, except in the very
 * first epoch (epochs_done == 0), which uses the stored levels. Returns the
 * mean training loss of each epoch run by this call. A non-finite loss or
 * gradient raises DivergenceError with the epoch and batch.
 */
std::vector<double> train_iqn(ImplicitQuantileNet& net, const TrainData& data, const LossConfig& loss,
                              const TrainConfig& config, TrainState& state);

/// Multi-quantile loss training of an explicit net.
std::vector<double> train_explicit(ExplicitQuantileNet& net, const TrainData& data, const LossConfig& loss,
                                   const TrainConfig& config, TrainState& state);

/// Mean-squared-error fit of a summary network to the targets.
std::vector<double> fit_summary(SummaryNet& net, const TrainData& data, const TrainConfig& config,
                                TrainState& state);

}  // namespace invbayes::nets
