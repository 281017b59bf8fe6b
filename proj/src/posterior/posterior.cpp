#include "invbayes/posterior/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "invbayes/errors.hpp"

namespace invbayes::posterior {

std::vector<double> PosteriorSampleSet::coordinate(std::size_t j) const {
    if (j >= dim) throw std::out_of_range("coordinate out of range");
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = draws[i * dim + j];
    return out;
}

double PosteriorSampleSet::violation_fraction() const {
    const std::size_t pairs = size() > 1 ? (size() - 1) * dim : 0;
    return pairs == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(pairs);
}

QuantileFn model_quantile_fn(const nets::QuantileModel& model, std::span<const double> observed, std::size_t coord) {
    if (observed.size() != model.conditioning_dim()) {
        throw ad::ShapeError("observation width " + std::to_string(observed.size()) +
                             " does not match the model's conditioning width " +
                             std::to_string(model.conditioning_dim()));
    }
    const auto features = model.features(observed);
    return [&model, features, coord](std::span<const double> taus) {
        std::vector<double> rows;
        rows.reserve(features.size() * taus.size());
        for (std::size_t i = 0; i < taus.size(); ++i) rows.insert(rows.end(), features.begin(), features.end());
        return model.quantiles_at_features(rows, coord, taus);
    };
}

namespace {

std::vector<double> base_draws(std::size_t m, std::uint64_t seed, std::size_t coord, bool sorted) {
    Rng rng = Rng(seed).split(coord);
    std::vector<double> taus(m);
    for (auto& t : taus) t = rng.uniform_open();
    if (sorted) std::sort(taus.begin(), taus.end());
    return taus;
}

std::size_t count_violations(std::span<const double> values) {
    std::size_t v = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1]) ++v;
    }
    return v;
}

PosteriorSampleSet sample_impl(const nets::QuantileModel& model, std::span<const double> observed, std::size_t m,
                               std::uint64_t seed, bool sorted) {
    if (m < 1) throw std::invalid_argument("posterior sampling needs at least one draw");
    PosteriorSampleSet out;
    out.dim = model.theta_dim();
    out.observed.assign(observed.begin(), observed.end());
    out.sorted = sorted;
    out.draws.resize(m * out.dim);
    out.taus.resize(m * out.dim);
    for (std::size_t j = 0; j < out.dim; ++j) {
        const auto q = model_quantile_fn(model, observed, j);
        const auto taus = base_draws(m, seed, j, sorted);
        const auto values = q(taus);
        if (sorted) out.violations += count_violations(values);
        for (std::size_t i = 0; i < m; ++i) {
            out.draws[i * out.dim + j] = values[i];
            out.taus[i * out.dim + j] = taus[i];
        }
    }
    return out;
}

}  // namespace

PosteriorSampleSet sample_posterior(const nets::QuantileModel& model, std::span<const double> observed,
                                    std::size_t m, std::uint64_t seed) {
    return sample_impl(model, observed, m, seed, false);
}

PosteriorSampleSet sorted_posterior_pairs(const nets::QuantileModel& model, std::span<const double> observed,
                                          std::size_t m, std::uint64_t seed) {
    return sample_impl(model, observed, m, seed, true);
}

PosteriorSampleSet sample_quantile_fn(const QuantileFn& q, std::size_t m, std::uint64_t seed, bool sorted) {
    if (m < 1) throw std::invalid_argument("posterior sampling needs at least one draw");
    PosteriorSampleSet out;
    out.sorted = sorted;
    out.taus = base_draws(m, seed, 0, sorted);
    out.draws = q(out.taus);
    if (out.draws.size() != m) throw std::logic_error("quantile function returned the wrong number of values");
    if (sorted) out.violations = count_violations(out.draws);
    return out;
}

double empirical_quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("empirical quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile level outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> values, double p) {
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    return empirical_quantile_sorted(s, p);
}

std::pair<double, double> credible_interval(std::span<const double> draws, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("credible level must lie in (0, 1)");
    if (draws.size() < 10) throw std::invalid_argument("credible interval needs at least 10 draws");
    std::vector<double> s(draws.begin(), draws.end());
    std::sort(s.begin(), s.end());
    return {empirical_quantile_sorted(s, (1.0 - level) / 2.0), empirical_quantile_sorted(s, (1.0 + level) / 2.0)};
}

std::pair<double, double> credible_interval(const PosteriorSampleSet& samples, double level, std::size_t coord) {
    return credible_interval(samples.coordinate(coord), level);
}

nlohmann::json FunctionalEstimate::to_json() const {
    return {{"value", value},     {"n", n},       {"estimator", estimator},
            {"transform", transform}, {"seed", seed}, {"delta", delta}};
}

std::vector<double> trapezoid_nodes(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("trapezoidal estimator needs n >= 1");
    Rng rng(seed);
    std::vector<double> y(n + 2);
    y.front() = 0.0;
    y.back() = 1.0;
    for (std::size_t i = 1; i <= n; ++i) y[i] = rng.uniform();
    std::sort(y.begin() + 1, y.end() - 1);
    return y;
}

namespace {

/// f(Q) at every node, with the endpoint and clipping rules.
std::vector<double> node_values(const QuantileFn& q, const Transform& f, std::span<const double> nodes, double delta) {
    if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("clipping delta must lie in (0, 0.5)");
    const std::size_t last = nodes.size() - 1;
    std::vector<double> at(nodes.begin(), nodes.end());
    for (std::size_t i = 1; i < last; ++i) at[i] = std::clamp(at[i], delta, 1.0 - delta);
    auto values = q(at);
    if (values.size() != at.size()) throw std::logic_error("quantile function returned the wrong number of values");
    if (!std::isfinite(values.front()) || !std::isfinite(values.back())) {
        const std::vector<double> ends{delta, 1.0 - delta};
        const auto clipped = q(ends);
        if (!std::isfinite(values.front())) values.front() = clipped[0];
        if (!std::isfinite(values.back())) values.back() = clipped[1];
    }
    for (std::size_t i = 0; i <= last; ++i) {
        values[i] = f(values[i]);
        if (!std::isfinite(values[i])) {
            throw std::domain_error("non-finite quantile value at node " + std::to_string(i) + " (level " +
                                    std::to_string(at[i]) + ")");
        }
    }
    return values;
}

double trapezoid_sum(std::span<const double> values, std::span<const double> nodes) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) s += (values[i] + values[i + 1]) * (nodes[i + 1] - nodes[i]);
    return 0.5 * s;
}

}  // namespace

FunctionalEstimate trapezoid_functional(const QuantileFn& q, const Transform& f, std::size_t n, std::uint64_t seed,
                                        double delta) {
    const auto nodes = trapezoid_nodes(n, seed);
    const auto values = node_values(q, f, nodes, delta);
    FunctionalEstimate e;
    e.value = trapezoid_sum(values, nodes);
    e.n = n;
    e.seed = seed;
    e.delta = delta;
    e.transform = "custom";
    return e;
}

namespace {

bool parse_indicator(const std::string& name, double& threshold) {
    const std::string prefix = "indicator:";
    if (name.rfind(prefix, 0) != 0) return false;
    const std::string rest = name.substr(prefix.size());
    try {
        std::size_t used = 0;
        threshold = std::stod(rest, &used);
        return used == rest.size() && std::isfinite(threshold);
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

bool is_known_transform(const std::string& t) {
    double threshold;
    return t == "identity" || t == "square" || t == "variance" || parse_indicator(t, threshold);
}

FunctionalEstimate named_functional(const QuantileFn& q, const std::string& transform, std::size_t n,
                                   std::uint64_t seed, double delta) {
    FunctionalEstimate e;
    double threshold = 0.0;
    if (transform == "identity") {
        e = trapezoid_functional(q, [](double x) { return x; }, n, seed, delta);
    } else if (transform == "square") {
        e = trapezoid_functional(q, [](double x) { return x * x; }, n, seed, delta);
    } else if (transform == "variance") {
        const auto nodes = trapezoid_nodes(n, seed);
        const auto values = node_values(q, [](double x) { return x; }, nodes, delta);
        std::vector<double> squares(values.size());
        std::transform(values.begin(), values.end(), squares.begin(), [](double x) { return x * x; });
        const double m1 = trapezoid_sum(values, nodes);
        e.value = trapezoid_sum(squares, nodes) - m1 * m1;
        e.n = n;
        e.seed = seed;
        e.delta = delta;
    } else if (parse_indicator(transform, threshold)) {
        e = trapezoid_functional(q, [threshold](double x) { return x <= threshold ? 1.0 : 0.0; }, n, seed, delta);
    } else {
        throw ConfigError("unknown transform '" + transform +
                          "' (valid transforms: identity, square, variance, indicator:<t>)");
    }
    e.transform = transform;
    return e;
}

void write_samples_csv(const PosteriorSampleSet& samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const std::size_t d = samples.dim;
    std::string line;
    if (d == 1) {
        line = "tau,theta_0";
    } else {
        for (std::size_t j = 0; j < d; ++j) line += (j ? ",tau_" : "tau_") + std::to_string(j);
        for (std::size_t j = 0; j < d; ++j) line += ",theta_" + std::to_string(j);
    }
    out << line << '\n';
    for (std::size_t i = 0; i < samples.size(); ++i) {
        line.clear();
        for (std::size_t j = 0; j < d; ++j) line += (j ? "," : "") + sim::format_double(samples.taus[i * d + j]);
        for (std::size_t j = 0; j < d; ++j) line += "," + sim::format_double(samples.draws[i * d + j]);
        out << line << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

nlohmann::json summarize(const PosteriorSampleSet& samples, double interval_level) {
    nlohmann::json coords = nlohmann::json::array();
    for (std::size_t j = 0; j < samples.dim; ++j) {
        auto v = samples.coordinate(j);
        std::sort(v.begin(), v.end());
        const double n = static_cast<double>(v.size());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        nlohmann::json c = {{"mean", mean},
                            {"variance", v.size() > 1 ? ss / (n - 1.0) : 0.0},
                            {"min", v.front()},
                            {"max", v.back()},
                            {"quantiles",
                             {{"0.05", empirical_quantile_sorted(v, 0.05)},
                              {"0.5", empirical_quantile_sorted(v, 0.5)},
                              {"0.95", empirical_quantile_sorted(v, 0.95)}}}};
        if (v.size() >= 10) {
            const auto [lo, hi] = credible_interval(v, interval_level);
            c["interval"] = {{"level", interval_level}, {"lo", lo}, {"hi", hi}};
        } else {
            c["interval"] = nullptr;
        }
        coords.push_back(std::move(c));
    }
    return {{"M", samples.size()},
            {"observed", samples.observed},
            {"sorted", samples.sorted},
            {"violations", samples.violations},
            {"quantile_convention", "linear interpolation between order statistics, h = (n - 1) p"},
            {"coordinates", std::move(coords)}};
}

}  // namespace invbayes::posterior
