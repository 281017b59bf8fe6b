#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "invbayes/oracles/normal.hpp"
#include "invbayes/random.hpp"

namespace invbayes::sim {

enum class ModelKind {
    stochastic,       // theta ~ prior, y | theta ~ p(y | theta)
    deterministic,    // theta ~ prior, y = f(theta)
    latent_composed,  // theta ~ prior, z | theta, y | z, theta
    regression,       // conditioning input x ~ design, target theta | x
};

const char* to_string(ModelKind kind);

using Vector = std::vector<double>;
using ConstVec = std::span<const double>;

/// One joint draw. For the regression kind, `y` carries the regressor and
/// `theta` the response whose conditional quantiles are learned.
struct Draw {
    Vector theta;
    Vector y;
    Vector z;
};

/**
 * Prior sampler plus simulator.
 *
 * Which callbacks are used depends on `kind`; the optional hooks expose an
 * exact sufficient statistic (used by rejection ABC) and a closed-form
 * Gaussian posterior for scalar theta (used by every oracle check).
 */
struct ForwardModel {
    std::string name;
    ModelKind kind = ModelKind::stochastic;
    std::size_t theta_dim = 1;
    std::size_t data_dim = 1;
    std::size_t latent_dim = 0;
    nlohmann::json descriptor;

    std::function<Vector(Rng&)> prior;
    std::function<Vector(ConstVec theta, Rng&)> simulate;
    std::function<Vector(ConstVec theta, Rng&)> latent;
    std::function<Vector(ConstVec theta, ConstVec z, Rng&)> simulate_given_latent;
    std::function<Draw(Rng&)> joint;

    std::function<Vector(ConstVec y)> sufficient_statistic;
    std::function<oracles::NormalLaw(ConstVec conditioning)> gaussian_posterior;

    /// Draws (theta, y, z); throws SimulationError on non-finite output.
    Draw draw(Rng& rng) const;

    /// Width of the vector the networks condition on (y followed by z).
    std::size_t conditioning_dim() const { return data_dim + latent_dim; }
};

ForwardModel make_stochastic(std::string name, std::size_t theta_dim, std::size_t data_dim,
                             std::function<Vector(Rng&)> prior, std::function<Vector(ConstVec, Rng&)> simulate);

ForwardModel make_deterministic(std::string name, std::size_t theta_dim, std::size_t data_dim,
                                std::function<Vector(Rng&)> prior, std::function<Vector(ConstVec)> f);

ForwardModel make_latent(std::string name, std::size_t theta_dim, std::size_t data_dim, std::size_t latent_dim,
                         std::function<Vector(Rng&)> prior, std::function<Vector(ConstVec, Rng&)> latent,
                         std::function<Vector(ConstVec, ConstVec, Rng&)> simulate_given_latent);

}  // namespace invbayes::sim
