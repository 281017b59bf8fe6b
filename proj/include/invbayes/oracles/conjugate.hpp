#pragma once

#include "invbayes/oracles/normal.hpp"

namespace invbayes::oracles {

/**
 * Normal-normal conjugate posterior.
 *
 * Prior theta ~ N(prior_mean, prior_var), observations y_i | theta ~
 * N(theta, noise_var), i = 1..n, summarized by their mean ybar.
 */
struct ConjugatePosterior {
    double prior_mean = 0.0;
    double prior_var = 1.0;
    double noise_var = 1.0;
    double n = 1.0;
    double ybar = 0.0;
    double mean = 0.0;      // posterior mean
    double variance = 0.0;  // posterior variance

    double sd() const;
    NormalLaw law() const { return {mean, sd()}; }
};

/// Throws std::invalid_argument for nonpositive variances or n < 1.
ConjugatePosterior conjugate_posterior(double prior_mean, double prior_var, double noise_var, double n, double ybar);

/// m + sqrt(v) * Phi^{-1}(u); u must lie in (0, 1).
double posterior_quantile(const ConjugatePosterior& cp, double u);

/// g(x) = Phi(w Phi^{-1}(x) + b), extended continuously to g(0)=0, g(1)=1 (w > 0).
double distortion(double w, double b, double x);

struct DistortionParams {
    double w = 1.0;
    double b = 0.0;
};

/**
 * Data-free distortion parameters
 *   w = tau / sqrt(sigma^2/n + tau^2),
 *   b = sqrt(tau^2 / (sigma^2/n + tau^2)) / (sigma / sqrt(n)).
 * These do not depend on ybar and do not map prior tails onto posterior
 * tails; kept for reference and compared against distortion_params() in tests.
 */
DistortionParams distortion_params_data_free(double prior_var, double noise_var, double n);

/**
 * Distortion parameters under which 1 - F_post(t) = g(1 - F_prior(t)) holds
 * exactly for every t:
 *   w = prior_sd / post_sd,  b = (post_mean - prior_mean) / post_sd.
 */
DistortionParams distortion_params(const ConjugatePosterior& cp);

}  // namespace invbayes::oracles
