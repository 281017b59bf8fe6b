#include "invbayes/nets/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "invbayes/errors.hpp"

namespace invbayes::nets {

Standardizer Standardizer::fit(std::span<const double> rows, std::size_t dim) {
    if (dim == 0 || rows.size() % dim != 0 || rows.empty()) {
        throw std::invalid_argument("Standardizer::fit needs at least one full row");
    }
    const std::size_t n = rows.size() / dim;
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.sd.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) s.mean[j] += rows[i * dim + j];
    }
    for (auto& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = rows[i * dim + j] - s.mean[j];
            s.sd[j] += d * d;
        }
    }
    for (auto& v : s.sd) {
        v = std::sqrt(v / static_cast<double>(n));
        if (!(v > 1e-12)) v = 1.0;
    }
    return s;
}

void Standardizer::apply(std::span<double> rows) const {
    const std::size_t d = dim();
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = (rows[i] - mean[i % d]) / sd[i % d];
}

void Standardizer::invert(std::span<double> rows) const {
    const std::size_t d = dim();
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = mean[i % d] + sd[i % d] * rows[i];
}

nlohmann::json Standardizer::to_json() const {
    return {{"mean", mean}, {"sd", sd}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sd = j.at("sd").get<std::vector<double>>();
    if (s.mean.size() != s.sd.size()) throw std::invalid_argument("scaler mean/sd widths differ");
    return s;
}

const char* to_string(NetKind k) {
    return k == NetKind::implicit ? "implicit" : "explicit";
}

NetKind parse_net_kind(const std::string& name) {
    if (name == "implicit") return NetKind::implicit;
    if (name == "explicit") return NetKind::explicit_levels;
    throw ConfigError("unknown network kind '" + name + "' (expected implicit or explicit)");
}

nlohmann::json ModelConfig::to_json() const {
    nlohmann::json j = {{"preset", preset},
                        {"kind", to_string(kind)},
                        {"levels", levels},
                        {"activation", nets::to_string(activation)},
                        {"alpha", loss.alpha},
                        {"crossing_penalty", loss.crossing_penalty},
                        {"use_summary", use_summary},
                        {"summary_hidden", summary_hidden}};
    if (summary_train) j["summary_train"] = train_config_to_json(*summary_train);
    return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.preset = j.value("preset", c.preset);
        c.kind = parse_net_kind(j.value("kind", std::string("implicit")));
        c.levels = j.value("levels", c.levels);
        c.activation = parse_activation(j.value("activation", std::string("relu")));
        c.loss.alpha = j.value("alpha", c.loss.alpha);
        c.loss.crossing_penalty =
            j.value("crossing_penalty", c.kind == NetKind::explicit_levels ? 1.0 : 0.0);
        c.use_summary = j.value("use_summary", c.use_summary);
        c.summary_hidden = j.value("summary_hidden", c.summary_hidden);
        if (j.contains("summary_train")) c.summary_train = train_config_from_json(j.at("summary_train"));
        c.loss.validate();
        preset_arch(c.preset, 1);
        if (c.kind == NetKind::explicit_levels) check_explicit_levels(c.levels);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("network config: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("network config: ") + e.what());
    }
    return c;
}

QuantileModel::QuantileModel(ModelConfig config, sim::DatasetDims dims, std::uint64_t seed)
    : config_(std::move(config)), dims_(dims), seed_(seed) {
    if (dims_.theta < 1) throw std::invalid_argument("model needs at least one parameter coordinate");
    if (dims_.tau != dims_.theta) throw std::invalid_argument("model expects one base draw per parameter coordinate");
    config_.loss.validate();
    const Rng root(seed_);
    if (config_.use_summary) {
        summary_.emplace(dims_.data, config_.summary_hidden, dims_.theta, config_.activation, root.split(3).next_u64());
    }
    auto arch = preset_arch(config_.preset, feature_dim());
    arch.activation = config_.activation;
    for (std::size_t j = 0; j < dims_.theta; ++j) {
        const auto s = root.split(10 + j).next_u64();
        if (config_.kind == NetKind::implicit) {
            implicit_.emplace_back(arch, s);
        } else {
            explicit_.emplace_back(arch, config_.levels, s);
        }
    }
    states_.resize(dims_.theta);
}

std::size_t QuantileModel::feature_dim() const {
    return (config_.use_summary ? dims_.theta : dims_.data) + dims_.latent;
}

std::vector<double> QuantileModel::raw_features(std::span<const double> rows) const {
    const std::size_t cdim = conditioning_dim();
    if (rows.size() % cdim != 0) {
        throw ad::ShapeError("conditioning input of " + std::to_string(rows.size()) +
                             " values is not a whole number of rows of width " + std::to_string(cdim));
    }
    if (!summary_) return {rows.begin(), rows.end()};
    const std::size_t n = rows.size() / cdim;
    std::vector<double> ys(n * dims_.data);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(i * cdim), dims_.data,
                    ys.begin() + static_cast<std::ptrdiff_t>(i * dims_.data));
    }
    summary_scaler_.apply(ys);
    const auto s = summary_->predict(ys);
    const std::size_t fdim = feature_dim();
    std::vector<double> out(n * fdim);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(i * dims_.theta), dims_.theta,
                    out.begin() + static_cast<std::ptrdiff_t>(i * fdim));
        std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(i * cdim + dims_.data), dims_.latent,
                    out.begin() + static_cast<std::ptrdiff_t>(i * fdim + dims_.theta));
    }
    return out;
}

std::vector<double> QuantileModel::features(std::span<const double> rows) const {
    auto f = raw_features(rows);
    input_scaler_.apply(f);
    return f;
}

std::vector<std::vector<double>> QuantileModel::fit(const sim::TripleDataset& data, const TrainConfig& train) {
    if (data.empty()) throw std::invalid_argument("cannot train on an empty dataset");
    if (!(data.dims() == dims_)) throw ConfigError("dataset widths do not match the model");
    train.validate();
    const std::size_t n = data.size();
    const std::size_t cdim = conditioning_dim();

    std::vector<double> cond(n * cdim), theta(n * dims_.theta);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = data.conditioning(i);
        std::copy(c.begin(), c.end(), cond.begin() + static_cast<std::ptrdiff_t>(i * cdim));
        const auto t = data.theta(i);
        std::copy(t.begin(), t.end(), theta.begin() + static_cast<std::ptrdiff_t>(i * dims_.theta));
    }

    if (!fitted_) {
        target_scaler_ = Standardizer::fit(theta, dims_.theta);
        if (summary_) {
            std::vector<double> ys(n * dims_.data);
            for (std::size_t i = 0; i < n; ++i) {
                const auto y = data.y(i);
                std::copy(y.begin(), y.end(), ys.begin() + static_cast<std::ptrdiff_t>(i * dims_.data));
            }
            summary_scaler_ = Standardizer::fit(ys, dims_.data);
            summary_scaler_.apply(ys);
            auto t_std = theta;
            target_scaler_.apply(t_std);
            TrainConfig sc = config_.summary_train.value_or(train);
            sc.seed = Rng(train.seed).split(1000).next_u64();
            summary_history_ = fit_summary(*summary_, {ys, dims_.data, t_std, dims_.theta, {}}, sc, summary_state_);
        }
        const auto raw = raw_features(cond);
        input_scaler_ = Standardizer::fit(raw, feature_dim());
    }
    const auto x = features(cond);

    std::vector<std::vector<double>> histories;
    std::vector<double> target(n), tau(n);
    for (std::size_t j = 0; j < dims_.theta; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            target[i] = (theta[i * dims_.theta + j] - target_scaler_.mean[j]) / target_scaler_.sd[j];
            tau[i] = data.tau(i)[j];
        }
        TrainConfig tc = train;
        tc.seed = Rng(train.seed).split(j).next_u64();
        const TrainData td{x, feature_dim(), target, 1, tau};
        if (config_.kind == NetKind::implicit) {
            histories.push_back(train_iqn(implicit_[j], td, config_.loss, tc, states_[j]));
        } else {
            histories.push_back(train_explicit(explicit_[j], td, config_.loss, tc, states_[j]));
        }
    }
    if (!fitted_) data_model = data.model;
    fitted_ = true;
    last_train = train;
    return histories;
}

std::vector<double> QuantileModel::quantiles_at_features(std::span<const double> rows, std::size_t coord,
                                                         std::span<const double> taus) const {
    if (coord >= dims_.theta) throw std::out_of_range("parameter coordinate out of range");
    check_levels(taus);
    const std::size_t fdim = feature_dim();
    if (rows.size() != taus.size() * fdim) {
        throw ad::ShapeError("expected one feature row of width " + std::to_string(fdim) + " per level");
    }
    std::vector<double> q;
    if (config_.kind == NetKind::implicit) {
        q = implicit_[coord].predict(rows, taus);
    } else {
        const auto& net = explicit_[coord];
        const auto& lv = net.levels();
        const std::size_t k = lv.size();
        const auto heads = net.predict(rows);
        q.resize(taus.size());
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const double* h = heads.data() + i * k;
            const double t = taus[i];
            if (t <= lv.front()) {
                q[i] = h[0];
            } else if (t >= lv.back()) {
                q[i] = h[k - 1];
            } else {
                const auto hi = static_cast<std::size_t>(std::upper_bound(lv.begin(), lv.end(), t) - lv.begin());
                const double w = (t - lv[hi - 1]) / (lv[hi] - lv[hi - 1]);
                q[i] = (1.0 - w) * h[hi - 1] + w * h[hi];
            }
        }
    }
    for (auto& v : q) v = target_scaler_.mean[coord] + target_scaler_.sd[coord] * v;
    return q;
}

std::vector<double> QuantileModel::quantiles(std::span<const double> conditioning, std::size_t coord,
                                             std::span<const double> taus) const {
    if (conditioning.size() != conditioning_dim()) {
        throw ad::ShapeError("observation width " + std::to_string(conditioning.size()) +
                             " does not match the model's conditioning width " + std::to_string(conditioning_dim()));
    }
    const auto f = features(conditioning);
    std::vector<double> rows;
    rows.reserve(f.size() * taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) rows.insert(rows.end(), f.begin(), f.end());
    return quantiles_at_features(rows, coord, taus);
}

std::vector<double> QuantileModel::summary(std::span<const double> y) const {
    if (y.size() != dims_.data) throw ad::ShapeError("summary input width mismatch");
    if (!summary_) return {y.begin(), y.end()};
    std::vector<double> ys(y.begin(), y.end());
    summary_scaler_.apply(ys);
    auto s = summary_->predict(ys);
    target_scaler_.invert(s);
    return s;
}

nlohmann::json QuantileModel::to_json() const {
    nlohmann::json nets = nlohmann::json::array();
    for (std::size_t j = 0; j < dims_.theta; ++j) {
        nlohmann::json n;
        if (config_.kind == NetKind::implicit) {
            n["arch"] = arch_to_json(implicit_[j].arch());
            n["params"] = tensors_to_json(implicit_[j].params());
        } else {
            n["arch"] = arch_to_json(explicit_[j].arch());
            n["levels"] = explicit_[j].levels();
            n["params"] = tensors_to_json(explicit_[j].params());
        }
        n["train_state"] = train_state_to_json(states_[j]);
        nets.push_back(std::move(n));
    }
    nlohmann::json j = {
        {"format", "invbayes-checkpoint"},
        {"version", kCheckpointVersion},
        {"config", config_.to_json()},
        {"dims", {{"theta", dims_.theta}, {"y", dims_.data}, {"tau", dims_.tau}, {"z", dims_.latent}}},
        {"seed", seed_},
        {"fitted", fitted_},
        {"input_scaler", input_scaler_.to_json()},
        {"target_scaler", target_scaler_.to_json()},
        {"nets", std::move(nets)},
    };
    if (summary_) {
        j["summary"] = {{"scaler", summary_scaler_.to_json()},
                        {"params", tensors_to_json(summary_->params())},
                        {"train_state", train_state_to_json(summary_state_)},
                        {"history", summary_history_}};
    }
    if (last_train) j["train"] = train_config_to_json(*last_train);
    j["data_model"] = data_model;
    return j;
}

QuantileModel QuantileModel::from_json(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != "invbayes-checkpoint") throw IoError("not a model checkpoint");
    const int version = j.value("version", -1);
    if (version != kCheckpointVersion) {
        throw IoError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
    }
    try {
        const auto& d = j.at("dims");
        const sim::DatasetDims dims{d.at("theta").get<std::size_t>(), d.at("y").get<std::size_t>(),
                                    d.at("tau").get<std::size_t>(), d.at("z").get<std::size_t>()};
        QuantileModel m(ModelConfig::from_json(j.at("config")), dims, j.at("seed").get<std::uint64_t>());
        m.fitted_ = j.at("fitted").get<bool>();
        m.input_scaler_ = Standardizer::from_json(j.at("input_scaler"));
        m.target_scaler_ = Standardizer::from_json(j.at("target_scaler"));
        const auto& nets = j.at("nets");
        if (nets.size() != dims.theta) throw IoError("checkpoint holds the wrong number of networks");
        for (std::size_t c = 0; c < dims.theta; ++c) {
            const auto& n = nets[c];
            auto params = tensors_from_json(n.at("params"));
            if (m.config_.kind == NetKind::implicit) {
                auto& net = m.implicit_[c];
                net = ImplicitQuantileNet(arch_from_json(n.at("arch")), 0);
                if (params.size() != net.params().size()) throw IoError("checkpoint network parameters are incomplete");
                for (auto& [name, t] : params) {
                    auto it = net.params().find(name);
                    if (it == net.params().end() || it->second.shape() != t.shape()) {
                        throw IoError("checkpoint parameter '" + name + "' does not match the architecture");
                    }
                    it->second = std::move(t);
                }
            } else {
                auto& net = m.explicit_[c];
                net = ExplicitQuantileNet(arch_from_json(n.at("arch")), n.at("levels").get<std::vector<double>>(), 0);
                if (params.size() != net.params().size()) throw IoError("checkpoint network parameters are incomplete");
                for (auto& [name, t] : params) {
                    auto it = net.params().find(name);
                    if (it == net.params().end() || it->second.shape() != t.shape()) {
                        throw IoError("checkpoint parameter '" + name + "' does not match the architecture");
                    }
                    it->second = std::move(t);
                }
            }
            m.states_[c] = train_state_from_json(n.at("train_state"));
        }
        if (j.contains("summary")) {
            if (!m.summary_) throw IoError("checkpoint has a summary network the config does not declare");
            const auto& s = j.at("summary");
            m.summary_scaler_ = Standardizer::from_json(s.at("scaler"));
            m.summary_->params() = tensors_from_json(s.at("params"));
            m.summary_state_ = train_state_from_json(s.at("train_state"));
            m.summary_history_ = s.at("history").get<std::vector<double>>();
        }
        if (j.contains("train")) m.last_train = train_config_from_json(j.at("train"));
        m.data_model = j.value("data_model", nlohmann::json());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed checkpoint: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const QuantileModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << model.to_json().dump() << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

QuantileModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("checkpoint '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return QuantileModel::from_json(j);
}

}  // namespace invbayes::nets
