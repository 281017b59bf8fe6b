#include "invbayes/nets/train.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include "invbayes/errors.hpp"

namespace invbayes::nets {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(learning_rate > 0.0) || !(final_learning_rate > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
}

double TrainConfig::rate_at(std::size_t epoch) const {
    if (epochs <= 1 || learning_rate == final_learning_rate) return learning_rate;
    const double t = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    return final_learning_rate + 0.5 * (learning_rate - final_learning_rate) * (1.0 + std::cos(std::numbers::pi * t));
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"final_learning_rate", c.final_learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    try {
        const bool has_final = j.contains("final_learning_rate");
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.final_learning_rate = has_final ? j.at("final_learning_rate").get<double>() : c.learning_rate;
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("training config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json tensors_to_json(const NamedTensors& t) {
    auto out = nlohmann::json::object();
    for (const auto& [name, v] : t) out[name] = {{"shape", v.shape()}, {"data", v.values()}};
    return out;
}

NamedTensors tensors_from_json(const nlohmann::json& j) {
    NamedTensors out;
    for (const auto& [name, v] : j.items()) {
        out.emplace(name, Tensor(v.at("shape").get<ad::Shape>(), v.at("data").get<std::vector<double>>()));
    }
    return out;
}

nlohmann::json train_state_to_json(const TrainState& s) {
    const auto& c = s.adam.config();
    return {{"step", s.adam.step()},
            {"epochs_done", s.epochs_done},
            {"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"m", tensors_to_json(s.adam.first_moments())},
            {"v", tensors_to_json(s.adam.second_moments())}};
}

TrainState train_state_from_json(const nlohmann::json& j) {
    TrainState s;
    ad::AdamConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    s.adam = ad::AdamState(c);
    s.adam.restore(j.at("step").get<std::uint64_t>(), tensors_from_json(j.at("m")), tensors_from_json(j.at("v")));
    s.epochs_done = j.at("epochs_done").get<std::size_t>();
    return s;
}

void TrainData::validate() const {
    const std::size_t n = size();
    if (n == 0) throw std::invalid_argument("training needs a nonempty dataset");
    if (targets.size() != n * target_dim || inputs.size() != n * input_dim) {
        throw ad::ShapeError("training inputs and targets disagree on the number of records");
    }
    if (!tau.empty() && tau.size() != n) throw ad::ShapeError("training levels must hold one value per record");
}

namespace {

/// Loss and gradients of one batch given the record indices and their levels.
using BatchStep = std::function<double(std::span<const std::size_t> idx, std::span<const double> taus,
                                       NamedTensors& grads)>;

bool finite_tensors(const NamedTensors& t) {
    for (const auto& [name, v] : t) {
        if (!v.all_finite()) return false;
    }
    return true;
}

std::vector<double> run_training(NamedTensors& params, const TrainData& data, const TrainConfig& config,
                                 TrainState& state, bool draw_levels, const BatchStep& step) {
    config.validate();
    data.validate();
    const std::size_t n = data.size();
    const Rng root(config.seed);

    state.adam.config().beta1 = config.beta1;
    state.adam.config().beta2 = config.beta2;

    std::vector<std::size_t> order(n);
    std::vector<double> levels(n);
    std::vector<double> batch_levels;
    std::vector<double> history;
    history.reserve(config.epochs);
    NamedTensors grads;

    for (std::size_t e = 0; e < config.epochs; ++e) {
        const std::size_t epoch = state.epochs_done;
        state.adam.config().learning_rate = config.rate_at(e);

        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle = root.split(1).split(epoch);
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

        if (draw_levels) {
            if (epoch == 0 && !data.tau.empty()) {
                std::copy(data.tau.begin(), data.tau.end(), levels.begin());
            } else {
                Rng fresh = root.split(2).split(epoch);
                for (auto& t : levels) t = fresh.uniform();
            }
        }

        double total = 0.0;
        std::size_t batch = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++batch) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            batch_levels.clear();
            if (draw_levels) {
                for (auto i : idx) batch_levels.push_back(levels[i]);
            }
            double loss = 0.0;
            try {
                loss = step(idx, batch_levels, grads);
            } catch (const ad::NumericalError& err) {
                throw DivergenceError(epoch, batch, err.what());
            }
            if (!std::isfinite(loss) || !finite_tensors(grads)) {
                throw DivergenceError(epoch, batch, "non-finite loss or gradient");
            }
            state.adam.apply(params, grads);
            if (!finite_tensors(params)) throw DivergenceError(epoch, batch, "non-finite parameter after update");
            total += loss * static_cast<double>(idx.size());
        }
        history.push_back(total / static_cast<double>(n));
        ++state.epochs_done;
    }
    return history;
}

void gather_rows(std::span<const double> src, std::size_t width, std::span<const std::size_t> idx,
                 std::vector<double>& dst) {
    dst.resize(idx.size() * width);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(idx[r] * width), width,
                    dst.begin() + static_cast<std::ptrdiff_t>(r * width));
    }
}

void fill_tensor(Tensor& t, std::size_t rows, std::size_t cols, const std::vector<double>& values) {
    if (t.shape() != ad::Shape{rows, cols}) t = Tensor({rows, cols});
    std::copy(values.begin(), values.end(), t.data().begin());
}

}  // namespace

std::vector<double> train_iqn(ImplicitQuantileNet& net, const TrainData& data, const LossConfig& loss,
                              const TrainConfig& config, TrainState& state) {
    if (data.input_dim != net.arch().input_dim || data.target_dim != 1) {
        throw ad::ShapeError("implicit net training expects inputs of width " + std::to_string(net.arch().input_dim) +
                             " and a scalar target");
    }
    auto lg = build_iqn_loss(net, loss);
    std::vector<double> ys, thetas;
    IqnBatch batch;
    auto step = [&](std::span<const std::size_t> idx, std::span<const double> taus, NamedTensors& grads) {
        const std::size_t b = idx.size();
        gather_rows(data.inputs, data.input_dim, idx, ys);
        gather_rows(data.targets, 1, idx, thetas);
        fill_tensor(batch.y, b, data.input_dim, ys);
        fill_tensor(batch.theta, b, 1, thetas);
        fill_tensor(batch.tau, b, 1, std::vector<double>(taus.begin(), taus.end()));
        if (batch.tau_half.size() != b) batch.tau_half = Tensor({b, 1}, 0.5);
        if (batch.side.size() != b) batch.side = Tensor({b, 1});
        for (std::size_t i = 0; i < b; ++i) batch.side[i] = taus[i] < 0.5 ? 1.0 : -1.0;
        ad::Bindings bind;
        bind.bind_all(net.params());
        batch.bind(bind);
        const double value = lg.graph.forward(bind, lg.loss).item();
        grads = lg.graph.backward();
        return value;
    };
    return run_training(net.params(), data, config, state, true, step);
}

std::vector<double> train_explicit(ExplicitQuantileNet& net, const TrainData& data, const LossConfig& loss,
                                   const TrainConfig& config, TrainState& state) {
    if (data.input_dim != net.arch().input_dim || data.target_dim != 1) {
        throw ad::ShapeError("explicit net training expects inputs of width " + std::to_string(net.arch().input_dim) +
                             " and a scalar target");
    }
    auto lg = build_explicit_loss(net, loss);
    std::vector<double> ys, thetas;
    Tensor yt, tt;
    auto step = [&](std::span<const std::size_t> idx, std::span<const double>, NamedTensors& grads) {
        gather_rows(data.inputs, data.input_dim, idx, ys);
        gather_rows(data.targets, 1, idx, thetas);
        fill_tensor(yt, idx.size(), data.input_dim, ys);
        fill_tensor(tt, idx.size(), 1, thetas);
        ad::Bindings bind;
        bind.bind_all(net.params()).bind("y", yt).bind("theta", tt);
        const double value = lg.graph.forward(bind, lg.loss).item();
        grads = lg.graph.backward();
        return value;
    };
    return run_training(net.params(), data, config, state, false, step);
}

std::vector<double> fit_summary(SummaryNet& net, const TrainData& data, const TrainConfig& config,
                                TrainState& state) {
    if (data.input_dim != net.input_dim() || data.target_dim != net.output_dim()) {
        throw ad::ShapeError("summary training widths do not match the network");
    }
    auto lg = build_summary_loss(net);
    std::vector<double> ys, thetas;
    Tensor yt, tt;
    auto step = [&](std::span<const std::size_t> idx, std::span<const double>, NamedTensors& grads) {
        gather_rows(data.inputs, data.input_dim, idx, ys);
        gather_rows(data.targets, data.target_dim, idx, thetas);
        fill_tensor(yt, idx.size(), data.input_dim, ys);
        fill_tensor(tt, idx.size(), data.target_dim, thetas);
        ad::Bindings bind;
        bind.bind_all(net.params()).bind("y", yt).bind("theta", tt);
        const double value = lg.graph.forward(bind, lg.loss).item();
        grads = lg.graph.backward();
        return value;
    };
    return run_training(net.params(), data, config, state, false, step);
}

}  // namespace invbayes::nets
