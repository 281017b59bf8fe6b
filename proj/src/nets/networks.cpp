#include "invbayes/nets/networks.hpp"

#include <stdexcept>

namespace invbayes::nets {

void QuantileArch::validate() const {
    if (input_dim < 1) throw std::invalid_argument("network input width must be positive");
    if (n_frequencies < 1) throw std::invalid_argument("n_frequencies must be positive");
    if (psi_widths.empty()) throw std::invalid_argument("psi needs at least one layer");
    for (auto w : psi_widths) {
        if (w < 1) throw std::invalid_argument("layer widths must be positive");
    }
    for (auto w : head_widths) {
        if (w < 1) throw std::invalid_argument("layer widths must be positive");
    }
}

QuantileArch preset_arch(std::string_view preset, std::size_t input_dim) {
    QuantileArch a;
    a.input_dim = input_dim;
    if (preset == "small") {
        a.preset = "small";
        a.n_frequencies = 32;
        a.psi_widths = {32};
        a.head_widths = {16};
    } else if (preset == "traffic") {
        a.preset = "traffic";
        a.n_frequencies = 64;
        a.psi_widths = {64, 64};
        a.head_widths = {32};
    } else {
        throw std::invalid_argument("unknown network preset '" + std::string(preset) +
                                    "' (valid presets: small, traffic)");
    }
    a.validate();
    return a;
}

std::vector<std::string_view> preset_names() {
    return {"small", "traffic"};
}

nlohmann::json arch_to_json(const QuantileArch& arch) {
    return {{"preset", arch.preset},
            {"input_dim", arch.input_dim},
            {"n_frequencies", arch.n_frequencies},
            {"psi_widths", arch.psi_widths},
            {"head_widths", arch.head_widths},
            {"activation", to_string(arch.activation)}};
}

QuantileArch arch_from_json(const nlohmann::json& j) {
    QuantileArch a;
    a.preset = j.at("preset").get<std::string>();
    a.input_dim = j.at("input_dim").get<std::size_t>();
    a.n_frequencies = j.at("n_frequencies").get<std::size_t>();
    a.psi_widths = j.at("psi_widths").get<std::vector<std::size_t>>();
    a.head_widths = j.at("head_widths").get<std::vector<std::size_t>>();
    a.activation = parse_activation(j.at("activation").get<std::string>());
    a.validate();
    return a;
}

Tensor batch_tensor(std::span<const double> flat, std::size_t cols) {
    if (cols == 0 || flat.size() % cols != 0) {
        throw ad::ShapeError("input of " + std::to_string(flat.size()) + " values is not a whole number of rows of width " +
                             std::to_string(cols));
    }
    return Tensor({flat.size() / cols, cols}, std::vector<double>(flat.begin(), flat.end()));
}

ImplicitQuantileNet::ImplicitQuantileNet(QuantileArch arch, std::uint64_t seed) : arch_(std::move(arch)) {
    arch_.validate();
    Rng rng(seed);
    Rng psi_rng = rng.split(0), phi_rng = rng.split(1), head_rng = rng.split(2);
    psi().init(params_, psi_rng);
    phi().init(params_, phi_rng);
    head().init(params_, head_rng);
}

DenseStack ImplicitQuantileNet::psi() const {
    return {"psi", arch_.input_dim, arch_.psi_widths, arch_.activation, true};
}

CosineEmbedding ImplicitQuantileNet::phi() const {
    return {"phi", arch_.n_frequencies, arch_.embedding_width()};
}

DenseStack ImplicitQuantileNet::head() const {
    auto widths = arch_.head_widths;
    widths.push_back(1);
    return {"g", arch_.embedding_width(), widths, arch_.activation, false};
}

NodeId ImplicitQuantileNet::build(Graph& g, NodeId y, NodeId tau) const {
    const auto features = g.mul(psi().build(g, y), phi().build(g, tau));
    return head().build(g, features);
}

std::vector<double> ImplicitQuantileNet::predict(std::span<const double> y, std::span<const double> taus) const {
    check_levels(taus);
    if (y.size() != taus.size() * arch_.input_dim) {
        throw ad::ShapeError("predict: expected " + std::to_string(taus.size()) + " rows of width " +
                             std::to_string(arch_.input_dim) + ", got " + std::to_string(y.size()) + " values");
    }
    if (taus.empty()) return {};
    Graph g;
    const auto out = build(g, g.input("y", false), g.input("tau", false));
    const Tensor yt = batch_tensor(y, arch_.input_dim);
    const Tensor tt({taus.size(), 1}, std::vector<double>(taus.begin(), taus.end()));
    ad::Bindings b;
    b.bind_all(params_).bind("y", yt).bind("tau", tt);
    return g.forward(b, out).values();
}

std::vector<double> ImplicitQuantileNet::quantiles(std::span<const double> y, std::span<const double> taus) const {
    if (y.size() != arch_.input_dim) {
        throw ad::ShapeError("quantiles: conditioning width " + std::to_string(y.size()) + " does not match network input " +
                             std::to_string(arch_.input_dim));
    }
    std::vector<double> rows;
    rows.reserve(taus.size() * y.size());
    for (std::size_t i = 0; i < taus.size(); ++i) rows.insert(rows.end(), y.begin(), y.end());
    return predict(rows, taus);
}

void check_explicit_levels(std::span<const double> levels) {
    if (levels.empty()) throw std::invalid_argument("explicit network needs at least one quantile level");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw std::invalid_argument("quantile levels must lie in (0, 1)");
        if (i > 0 && !(levels[i] > levels[i - 1])) {
            throw std::invalid_argument("quantile levels must be strictly increasing");
        }
    }
}

ExplicitQuantileNet::ExplicitQuantileNet(QuantileArch arch, std::vector<double> levels, std::uint64_t seed)
    : arch_(std::move(arch)), levels_(std::move(levels)) {
    arch_.validate();
    check_explicit_levels(levels_);
    Rng rng(seed);
    trunk().init(params_, rng);
}

DenseStack ExplicitQuantileNet::trunk() const {
    auto widths = arch_.psi_widths;
    widths.insert(widths.end(), arch_.head_widths.begin(), arch_.head_widths.end());
    widths.push_back(levels_.size());
    return {"trunk", arch_.input_dim, widths, arch_.activation, false};
}

NodeId ExplicitQuantileNet::build(Graph& g, NodeId y) const {
    return trunk().build(g, y);
}

std::vector<double> ExplicitQuantileNet::predict(std::span<const double> y) const {
    if (y.empty()) return {};
    Graph g;
    const auto out = build(g, g.input("y", false));
    const Tensor yt = batch_tensor(y, arch_.input_dim);
    ad::Bindings b;
    b.bind_all(params_).bind("y", yt);
    return g.forward(b, out).values();
}

SummaryNet::SummaryNet(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t output_dim,
                       Activation activation, std::uint64_t seed) {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("summary network widths must be positive");
    hidden.push_back(output_dim);
    stack_ = {"summary", input_dim, std::move(hidden), activation, false};
    Rng rng(seed);
    stack_.init(params_, rng);
}

std::vector<double> SummaryNet::predict(std::span<const double> y) const {
    if (y.empty()) return {};
    Graph g;
    const auto out = build(g, g.input("y", false));
    const Tensor yt = batch_tensor(y, stack_.in);
    ad::Bindings b;
    b.bind_all(params_).bind("y", yt);
    return g.forward(b, out).values();
}

}  // namespace invbayes::nets
