#include "invbayes/oracles/conjugate.hpp"

#include <cmath>
#include <stdexcept>

namespace invbayes::oracles {

double ConjugatePosterior::sd() const {
    return std::sqrt(variance);
}

ConjugatePosterior conjugate_posterior(double prior_mean, double prior_var, double noise_var, double n, double ybar) {
    if (!(prior_var > 0.0) || !(noise_var > 0.0)) {
        throw std::invalid_argument("conjugate_posterior: variances must be positive");
    }
    if (!(n >= 1.0)) throw std::invalid_argument("conjugate_posterior: n must be at least 1");
    ConjugatePosterior cp{prior_mean, prior_var, noise_var, n, ybar, 0.0, 0.0};
    const double sampling_var = noise_var / n;
    const double total = sampling_var + prior_var;
    cp.mean = (sampling_var * prior_mean + prior_var * ybar) / total;
    cp.variance = sampling_var * prior_var / total;
    return cp;
}

double posterior_quantile(const ConjugatePosterior& cp, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("posterior_quantile: u must lie in (0, 1)");
    return cp.mean + cp.sd() * normal_quantile(u);
}

double distortion(double w, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return normal_cdf(w * normal_quantile(x) + b);
}

DistortionParams distortion_params_data_free(double prior_var, double noise_var, double n) {
    const double sampling_var = noise_var / n;
    const double total = sampling_var + prior_var;
    return {std::sqrt(prior_var / total), std::sqrt(prior_var / total) / std::sqrt(sampling_var)};
}

DistortionParams distortion_params(const ConjugatePosterior& cp) {
    const double post_sd = cp.sd();
    return {std::sqrt(cp.prior_var) / post_sd, (cp.mean - cp.prior_mean) / post_sd};
}

}  // namespace invbayes::oracles
