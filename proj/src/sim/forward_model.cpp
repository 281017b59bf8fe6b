#include "invbayes/sim/forward_model.hpp"

#include <cmath>
#include <sstream>

#include "invbayes/errors.hpp"

namespace invbayes::sim {

namespace {

std::string format_vec(ConstVec v) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ")";
    return os.str();
}

void require_finite(const Vector& v, std::size_t width, const char* what, ConstVec theta) {
    if (v.size() != width) {
        throw SimulationError(std::string(what) + " has width " + std::to_string(v.size()) + ", expected " +
                              std::to_string(width));
    }
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw SimulationError(std::string("non-finite ") + what + " for theta = " + format_vec(theta));
        }
    }
}

}  // namespace

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::stochastic: return "stochastic";
        case ModelKind::deterministic: return "deterministic";
        case ModelKind::latent_composed: return "latent-composed";
        case ModelKind::regression: return "regression";
    }
    return "?";
}

Draw ForwardModel::draw(Rng& rng) const {
    Draw d;
    if (kind == ModelKind::regression) {
        d = joint(rng);
    } else {
        d.theta = prior(rng);
        require_finite(d.theta, theta_dim, "prior draw", d.theta);
        if (kind == ModelKind::latent_composed) {
            d.z = latent(d.theta, rng);
            require_finite(d.z, latent_dim, "latent draw", d.theta);
            d.y = simulate_given_latent(d.theta, d.z, rng);
        } else {
            d.y = simulate(d.theta, rng);
        }
    }
    require_finite(d.theta, theta_dim, "theta", d.theta);
    require_finite(d.y, data_dim, "simulator output", d.theta);
    require_finite(d.z, latent_dim, "latent", d.theta);
    return d;
}

ForwardModel make_stochastic(std::string name, std::size_t theta_dim, std::size_t data_dim,
                             std::function<Vector(Rng&)> prior, std::function<Vector(ConstVec, Rng&)> simulate) {
    ForwardModel m;
    m.name = std::move(name);
    m.kind = ModelKind::stochastic;
    m.theta_dim = theta_dim;
    m.data_dim = data_dim;
    m.prior = std::move(prior);
    m.simulate = std::move(simulate);
    m.descriptor = {{"name", m.name}};
    return m;
}

ForwardModel make_deterministic(std::string name, std::size_t theta_dim, std::size_t data_dim,
                                std::function<Vector(Rng&)> prior, std::function<Vector(ConstVec)> f) {
    ForwardModel m;
    m.name = std::move(name);
    m.kind = ModelKind::deterministic;
    m.theta_dim = theta_dim;
    m.data_dim = data_dim;
    m.prior = std::move(prior);
    m.simulate = [f = std::move(f)](ConstVec theta, Rng&) { return f(theta); };
    m.descriptor = {{"name", m.name}};
    return m;
}

ForwardModel make_latent(std::string name, std::size_t theta_dim, std::size_t data_dim, std::size_t latent_dim,
                         std::function<Vector(Rng&)> prior, std::function<Vector(ConstVec, Rng&)> latent,
                         std::function<Vector(ConstVec, ConstVec, Rng&)> simulate_given_latent) {
    ForwardModel m;
    m.name = std::move(name);
    m.kind = ModelKind::latent_composed;
    m.theta_dim = theta_dim;
    m.data_dim = data_dim;
    m.latent_dim = latent_dim;
    m.prior = std::move(prior);
    m.latent = std::move(latent);
    m.simulate_given_latent = std::move(simulate_given_latent);
    m.descriptor = {{"name", m.name}};
    return m;
}

}  // namespace invbayes::sim
