#include "invbayes/sim/builtins.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "invbayes/errors.hpp"
#include "invbayes/oracles/conjugate.hpp"

namespace invbayes::sim {

using std::numbers::pi;

ForwardModel builtin_normal_normal(double mu, double tau2, double sigma2, std::size_t n_obs) {
    if (!(tau2 > 0.0) || !(sigma2 > 0.0)) {
        throw std::invalid_argument("normal_normal: tau2 and sigma2 must be positive");
    }
    if (n_obs < 1) throw std::invalid_argument("normal_normal: n_obs must be at least 1");

    const double tau = std::sqrt(tau2);
    const double sigma = std::sqrt(sigma2);
    auto m = make_stochastic(
        "normal_normal", 1, n_obs, [mu, tau](Rng& rng) { return Vector{rng.normal(mu, tau)}; },
        [sigma, n_obs](ConstVec theta, Rng& rng) {
            Vector y(n_obs);
            for (auto& v : y) v = rng.normal(theta[0], sigma);
            return y;
        });
    m.descriptor = {{"name", "normal_normal"}, {"mu", mu}, {"tau2", tau2}, {"sigma2", sigma2}, {"n_obs", n_obs}};
    m.sufficient_statistic = [](ConstVec y) {
        return Vector{std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size())};
    };
    m.gaussian_posterior = [mu, tau2, sigma2](ConstVec y) {
        const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
        return oracles::conjugate_posterior(mu, tau2, sigma2, static_cast<double>(y.size()), ybar).law();
    };
    return m;
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - (pi * x) * (pi * x) / 6.0;
    return std::sin(pi * x) / (pi * x);
}

namespace {

double sinc_noise_sd(double x) {
    return std::sqrt(std::exp(1.0 - x) / 10.0);
}

}  // namespace

double sinc_true_quantile(double x, double tau) {
    return sinc(x) + oracles::normal_quantile(tau) * sinc_noise_sd(x);
}

ForwardModel builtin_sinc() {
    ForwardModel m;
    m.name = "sinc";
    m.kind = ModelKind::regression;
    m.theta_dim = 1;
    m.data_dim = 1;
    m.descriptor = {{"name", "sinc"}};
    m.joint = [](Rng& rng) {
        const double x = rng.uniform(-1.0, 1.0);
        const double response = rng.normal(sinc(x), sinc_noise_sd(x));
        return Draw{{response}, {x}, {}};
    };
    m.gaussian_posterior = [](ConstVec x) { return oracles::NormalLaw{sinc(x[0]), sinc_noise_sd(x[0])}; };
    return m;
}

ForwardModel builtin_identity(std::size_t k) {
    if (k < 1) throw std::invalid_argument("identity: dimension must be positive");
    auto m = make_deterministic(
        "identity", k, k,
        [k](Rng& rng) {
            Vector t(k);
            for (auto& v : t) v = rng.normal();
            return t;
        },
        [](ConstVec theta) { return Vector(theta.begin(), theta.end()); });
    m.descriptor = {{"name", "identity"}, {"k", k}};
    return m;
}

double standin_mean(std::span<const double> u) {
    return 2.2 + 0.6 * u[0] - 0.3 * u[1] + 0.25 * std::sin(pi * u[2]) + 0.2 * std::cos(pi * u[3]) +
           0.15 * u[4] * u[4] - 0.4 * u[5] + 0.3 * u[5] * u[6];
}

double standin_sd(std::span<const double> u) {
    return 0.1 + 0.2 * u[6];
}

ForwardModel builtin_satellite_standin() {
    ForwardModel m;
    m.name = "satellite_standin";
    m.kind = ModelKind::regression;
    m.theta_dim = 1;
    m.data_dim = 7;
    m.descriptor = {{"name", "satellite_standin"}};
    m.joint = [](Rng& rng) {
        Vector u(7);
        for (auto& v : u) v = rng.uniform();
        const double drag = rng.normal(standin_mean(u), standin_sd(u));
        return Draw{{drag}, std::move(u), {}};
    };
    m.gaussian_posterior = [](ConstVec u) { return oracles::NormalLaw{standin_mean(u), standin_sd(u)}; };
    return m;
}

std::vector<std::string_view> builtin_names() {
    return {"normal_normal", "sinc", "identity", "satellite_standin"};
}

ForwardModel make_builtin(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("name") || !spec["name"].is_string()) {
        throw ConfigError("model spec must be an object with a string 'name'");
    }
    const auto name = spec["name"].get<std::string>();
    try {
        if (name == "normal_normal") {
            const auto n_obs = spec.value("n_obs", 5);
            if (n_obs < 1) throw ConfigError("normal_normal: n_obs must be at least 1");
            return builtin_normal_normal(spec.value("mu", 0.0), spec.value("tau2", 1.0), spec.value("sigma2", 1.0),
                                         static_cast<std::size_t>(n_obs));
        }
        if (name == "sinc") return builtin_sinc();
        if (name == "identity") return builtin_identity(spec.value("k", std::size_t{1}));
        if (name == "satellite_standin") return builtin_satellite_standin();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("model '" + name + "': " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::string valid;
    for (auto n : builtin_names()) valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("unknown builtin model '" + name + "' (valid models: " + valid + ")");
}

}  // namespace invbayes::sim
