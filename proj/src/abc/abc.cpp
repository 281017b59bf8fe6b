#include "invbayes/abc/abc.hpp"

#include <chrono>
#include <fstream>

#include "invbayes/errors.hpp"
#include "invbayes/metrics/metrics.hpp"
#include "invbayes/oracles/normal.hpp"
#include "invbayes/posterior/posterior.hpp"

namespace invbayes::abc {

const char* to_string(SummarySource s) {
    return s == SummarySource::exact ? "exact" : "learned";
}

SummarySource parse_summary_source(const std::string& name) {
    if (name == "exact") return SummarySource::exact;
    if (name == "learned") return SummarySource::learned;
    throw ConfigError("unknown summary source '" + name + "' (expected exact or learned)");
}

void AbcConfig::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("ABC epsilon must be positive");
    if (budget < 1) throw ConfigError("ABC budget must be at least 1");
}

nlohmann::json AbcConfig::to_json() const {
    return {{"epsilon", epsilon}, {"budget", budget}, {"summary", to_string(source)}, {"distance", "standardized euclidean"}};
}

oracles::SummaryFn summary_function(const sim::ForwardModel& model, SummarySource source,
                                    const nets::QuantileModel* learned) {
    if (source == SummarySource::exact) {
        if (!model.sufficient_statistic) {
            throw ConfigError("model '" + model.name + "' has no exact sufficient statistic; use the learned summary");
        }
        return model.sufficient_statistic;
    }
    if (!learned || !learned->config().use_summary) {
        throw ConfigError("learned ABC summary needs a checkpoint trained with a summary network");
    }
    if (learned->dims().data != model.data_dim) throw ConfigError("summary network width does not match the model");
    return [learned](std::span<const double> y) { return learned->summary(y); };
}

SimulationTable abc_simulate(const sim::ForwardModel& model, const AbcConfig& config, std::uint64_t seed,
                             const nets::QuantileModel* learned, unsigned threads) {
    config.validate();
    return oracles::simulate_table(model, summary_function(model, config.source, learned), config.budget, seed,
                                   threads);
}

RejectionResult abc_filter(const SimulationTable& table, std::span<const double> observed_summary, double epsilon) {
    const auto sd = table.summary_sd();
    return oracles::filter_table(table, observed_summary, epsilon, sd);
}

RejectionResult abc_posterior(const sim::ForwardModel& model, std::span<const double> y_obs, const AbcConfig& config,
                              std::uint64_t seed, const nets::QuantileModel* learned, unsigned threads) {
    config.validate();
    if (y_obs.size() != model.data_dim) throw ConfigError("observation width does not match the model");
    const auto summary = summary_function(model, config.source, learned);
    const auto table = oracles::simulate_table(model, summary, config.budget, seed, threads);
    return abc_filter(table, summary(y_obs), config.epsilon);
}

nlohmann::json result_to_json(const RejectionResult& r) {
    return {{"status", r.status == RejectionResult::Status::ok ? "ok" : "empty"},
            {"budget", r.budget},
            {"accepted", r.accepted},
            {"acceptance_rate", r.acceptance_rate},
            {"min_distance", r.min_distance}};
}

void write_accepted_csv(const RejectionResult& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    std::string line;
    for (std::size_t j = 0; j < r.dim; ++j) line += (j ? ",theta_" : "theta_") + std::to_string(j);
    out << line << '\n';
    for (std::size_t i = 0; i < r.accepted; ++i) {
        line.clear();
        for (std::size_t j = 0; j < r.dim; ++j) line += (j ? "," : "") + sim::format_double(r.draws[i * r.dim + j]);
        out << line << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json ComparisonReport::to_json() const {
    return {{"abc_config", abc_config},
            {"observed", observed},
            {"draws", draws},
            {"abc", {{"result", result_to_json(abc)}, {"w1_to_oracle", optional_json(abc_method.w1_to_oracle)}}},
            {"network", {{"samples", network.samples}, {"w1_to_oracle", optional_json(network.w1_to_oracle)}}},
            {"w1_between", optional_json(w1_between)}};
}

nlohmann::json ComparisonReport::timing_json() const {
    return {{"abc", {{"seconds", abc_method.seconds}, {"seconds_per_effective_sample", abc_method.seconds_per_sample}}},
            {"network", {{"seconds", network.seconds}, {"seconds_per_sample", network.seconds_per_sample}}}};
}

ComparisonReport budget_matched_compare(const sim::ForwardModel& model, std::span<const double> y_obs,
                                        const AbcConfig& config, const nets::QuantileModel& trained, std::size_t m,
                                        std::uint64_t seed, unsigned threads) {
    using clock = std::chrono::steady_clock;
    ComparisonReport rep;
    rep.abc_config = config.to_json();
    rep.observed.assign(y_obs.begin(), y_obs.end());
    rep.draws = m;

    const auto t0 = clock::now();
    rep.abc = abc_posterior(model, y_obs, config, Rng(seed).split(0).next_u64(), &trained, threads);
    const auto t1 = clock::now();
    const auto net = posterior::sample_posterior(trained, y_obs, m, Rng(seed).split(1).next_u64());
    const auto t2 = clock::now();

    rep.abc_method.samples = rep.abc.accepted;
    rep.abc_method.seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.abc_method.seconds_per_sample =
        rep.abc.accepted ? rep.abc_method.seconds / static_cast<double>(rep.abc.accepted) : 0.0;
    rep.network.samples = net.size();
    rep.network.seconds = std::chrono::duration<double>(t2 - t1).count();
    rep.network.seconds_per_sample = rep.network.seconds / static_cast<double>(net.size());

    const auto net_draws = net.coordinate(0);
    const auto abc_draws = rep.abc.accepted ? rep.abc.coordinate(0) : std::vector<double>{};
    if (model.gaussian_posterior && model.theta_dim == 1) {
        const auto law = model.gaussian_posterior(y_obs);
        rep.network.w1_to_oracle = oracles::w1_to_normal(net_draws, law);
        if (!abc_draws.empty()) rep.abc_method.w1_to_oracle = oracles::w1_to_normal(abc_draws, law);
    }
    if (!abc_draws.empty()) rep.w1_between = metrics::w1_distance(abc_draws, net_draws);
    return rep;
}

}  // namespace invbayes::abc
