#include "invbayes/autodiff/adam.hpp"

#include <cmath>

namespace invbayes::ad {

void AdamState::apply(NamedTensors& params, const NamedTensors& grads) {
    for (const auto& [name, g] : grads) {
        auto it = params.find(name);
        if (it == params.end()) continue;
        if (it->second.shape() != g.shape()) {
            throw ShapeError("adam: gradient for '" + name + "' has shape " + to_string(g.shape()) +
                             ", parameter has " + to_string(it->second.shape()));
        }
        for (auto* moments : {&m_, &v_}) {
            auto [mit, inserted] = moments->try_emplace(name, Tensor(g.shape()));
            if (!inserted && mit->second.shape() != g.shape()) {
                throw ShapeError("adam: moment shape mismatch for '" + name + "'");
            }
        }
    }

    ++step_;
    const double t = static_cast<double>(step_);
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    const double lr = config_.learning_rate;

    for (const auto& [name, g] : grads) {
        auto it = params.find(name);
        if (it == params.end()) continue;
        auto& p = it->second;
        auto& m = m_.at(name);
        auto& v = v_.at(name);
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

void AdamState::restore(std::uint64_t step, NamedTensors first, NamedTensors second) {
    step_ = step;
    m_ = std::move(first);
    v_ = std::move(second);
}

}  // namespace invbayes::ad
