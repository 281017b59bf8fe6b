#pragma once

#include <span>

namespace invbayes::oracles {

double normal_pdf(double x);

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, Wichura's AS241 rational approximation
/// (relative accuracy about 1e-16). Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

/// A univariate normal law; the closed-form reference for every builtin model.
struct NormalLaw {
    double mean = 0.0;
    double sd = 1.0;

    double quantile(double u) const { return mean + sd * normal_quantile(u); }
    double cdf(double x) const { return normal_cdf((x - mean) / sd); }
};

/// Exact 1-Wasserstein distance between the empirical distribution of
/// `samples` and a normal law, integrating the quantile difference in closed
/// form on each order-statistic interval.
double w1_to_normal(std::span<const double> samples, const NormalLaw& law);

}  // namespace invbayes::oracles
