#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "invbayes/sim/forward_model.hpp"

namespace invbayes::sim {

/// theta ~ N(mu, tau2), y_1..y_n | theta iid N(theta, sigma2). Exposes ybar as
/// the sufficient statistic and the conjugate posterior as oracle.
ForwardModel builtin_normal_normal(double mu, double tau2, double sigma2, std::size_t n_obs);

/// x ~ U(-1, 1), response ~ N(sinc(pi x), exp(1 - x) / 10). The regressor is
/// the conditioning input and the response is the target.
ForwardModel builtin_sinc();

/// sin(pi x) / (pi x), equal to 1 at x = 0.
double sinc(double x);

/// True tau-quantile of the sinc response at x.
double sinc_true_quantile(double x, double tau);

/// theta ~ N(0, 1)^k, y = theta. Deterministic forward map used in tests.
ForwardModel builtin_identity(std::size_t k);

/// Seven inputs uniform on [0, 1] (the min-max scaled satellite input space),
/// response = smooth mean + heteroskedastic Gaussian noise. Stand-in for the
/// satellite-drag export when that dataset is unavailable.
ForwardModel builtin_satellite_standin();

double standin_mean(std::span<const double> u);
double standin_sd(std::span<const double> u);

/// Names accepted by make_builtin().
std::vector<std::string_view> builtin_names();

/// Builds a builtin from {"name": ..., params...}; throws ConfigError on an
/// unknown name or bad parameters.
ForwardModel make_builtin(const nlohmann::json& spec);

}  // namespace invbayes::sim
