#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "invbayes/nets/model.hpp"

namespace invbayes::posterior {

/**
 * M posterior draws theta_m = H(S(y_obs), tau_m), stored row-major with one
 * column per parameter coordinate, next to the base draws that produced them.
 */
struct PosteriorSampleSet {
    std::size_t dim = 1;
    std::vector<double> draws;
    std::vector<double> taus;
    std::vector<double> observed;
    bool sorted = false;
    /// With `sorted`, the number of adjacent pairs whose draws decrease although
    /// their levels increase, summed over coordinates.
    std::size_t violations = 0;

    std::size_t size() const { return dim == 0 ? 0 : draws.size() / dim; }
    std::vector<double> coordinate(std::size_t j) const;
    double violation_fraction() const;
};

/// Vectorized quantile function: one value per level.
using QuantileFn = std::function<std::vector<double>(std::span<const double> taus)>;

/// The model's quantile function of theta_coord given one observation.
QuantileFn model_quantile_fn(const nets::QuantileModel& model, std::span<const double> observed,
                             std::size_t coord = 0);

/**
 * Fresh uniform base draws (one independent stream per coordinate, derived
 * from `seed`) pushed through the model. Throws ad::ShapeError when the
 * observation width does not match the model.
 */
PosteriorSampleSet sample_posterior(const nets::QuantileModel& model, std::span<const double> observed,
                                    std::size_t m, std::uint64_t seed);

/// As sample_posterior, but the base draws are sorted ascending before
/// evaluation and monotonicity violations are counted.
PosteriorSampleSet sorted_posterior_pairs(const nets::QuantileModel& model, std::span<const double> observed,
                                          std::size_t m, std::uint64_t seed);

/// Scalar-map versions used with closed-form quantile functions.
PosteriorSampleSet sample_quantile_fn(const QuantileFn& q, std::size_t m, std::uint64_t seed, bool sorted);

/**
 * Empirical p-quantile with linear interpolation between order statistics:
 * h = (n - 1) p, x_(floor h) + (h - floor h)(x_(floor h + 1) - x_(floor h))
 * on the 0-based sorted sample.
 */
double empirical_quantile(std::span<const double> values, double p);
double empirical_quantile_sorted(std::span<const double> sorted, double p);

/// Central interval: empirical (1 - level)/2 and (1 + level)/2 quantiles.
/// Throws std::invalid_argument for fewer than 10 draws or level outside (0, 1).
std::pair<double, double> credible_interval(std::span<const double> draws, double level);
std::pair<double, double> credible_interval(const PosteriorSampleSet& samples, double level, std::size_t coord = 0);

struct FunctionalEstimate {
    double value = 0.0;
    std::size_t n = 0;
    std::string estimator = "trapezoidal";
    std::string transform = "identity";
    std::uint64_t seed = 0;
    double delta = 1e-6;

    nlohmann::json to_json() const;
};

using Transform = std::function<double(double)>;

inline constexpr double kEndpointClip = 1e-6;

/**
 * Sorted nodes 0 = Y_0 < Y_1 <= ... <= Y_n < Y_{n+1} = 1 from n seeded uniforms.
 */
std::vector<double> trapezoid_nodes(std::size_t n, std::uint64_t seed);

/**
 * theta_n = 1/2 sum_i (f(Q(Y_i)) + f(Q(Y_{i+1}))) (Y_{i+1} - Y_i), estimating
 * E[f(theta)]. Interior nodes are evaluated at max(Y, delta), min(Y, 1 - delta);
 * the endpoints 0 and 1 are evaluated exactly when Q is finite there and at
 * delta, 1 - delta otherwise. A non-finite interior value throws
 * std::domain_error.
 */
FunctionalEstimate trapezoid_functional(const QuantileFn& q, const Transform& f, std::size_t n, std::uint64_t seed,
                                        double delta = kEndpointClip);

/// Named transforms: identity, square, variance (E[theta^2] - E[theta]^2 on
/// one node set) and indicator:<t> (theta <= t). Throws ConfigError otherwise.
FunctionalEstimate named_functional(const QuantileFn& q, const std::string& transform, std::size_t n,
                                   std::uint64_t seed, double delta = kEndpointClip);
bool is_known_transform(const std::string& transform);

/// CSV "tau,theta_0" (one coordinate) or "tau_0..,theta_0.." rows.
void write_samples_csv(const PosteriorSampleSet& samples, const std::filesystem::path& path);

/// {M, observed, coordinates: [{mean, variance, quantiles, interval}], ...}.
nlohmann::json summarize(const PosteriorSampleSet& samples, double interval_level);

}  // namespace invbayes::posterior
