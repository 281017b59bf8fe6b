#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "invbayes/nets/model.hpp"
#include "invbayes/oracles/rejection.hpp"

namespace invbayes::abc {

enum class SummarySource { exact, learned };

const char* to_string(SummarySource s);
SummarySource parse_summary_source(const std::string& name);

/**
 * Rejection-ABC settings. Distances are Euclidean on summaries divided by
 * their standard deviation over the simulation budget, so one epsilon is
 * meaningful across summary dimensions.
 */
struct AbcConfig {
    double epsilon = 0.1;
    std::size_t budget = 100000;
    SummarySource source = SummarySource::exact;

    void validate() const;
    nlohmann::json to_json() const;
};

using oracles::RejectionResult;
using oracles::SimulationTable;

/// Summary map for the configured source; `learned` needs a model fitted
/// with a summary network.
oracles::SummaryFn summary_function(const sim::ForwardModel& model, SummarySource source,
                                    const nets::QuantileModel* learned);

/// Simulates the budget once; abc_filter can then apply several epsilons.
SimulationTable abc_simulate(const sim::ForwardModel& model, const AbcConfig& config, std::uint64_t seed,
                             const nets::QuantileModel* learned = nullptr, unsigned threads = 1);

/// Indicator-kernel acceptance on standardized summaries.
RejectionResult abc_filter(const SimulationTable& table, std::span<const double> observed_summary, double epsilon);

/// Accepted draws and acceptance rate; status `empty` (with the minimum
/// observed distance) when nothing is accepted.
RejectionResult abc_posterior(const sim::ForwardModel& model, std::span<const double> y_obs, const AbcConfig& config,
                              std::uint64_t seed, const nets::QuantileModel* learned = nullptr,
                              unsigned threads = 1);

nlohmann::json result_to_json(const RejectionResult& r);

/// accepted draws, one row per draw ("theta_0..").
void write_accepted_csv(const RejectionResult& r, const std::filesystem::path& path);

struct MethodSummary {
    std::size_t samples = 0;
    std::optional<double> w1_to_oracle;
    double seconds = 0.0;
    double seconds_per_sample = 0.0;
};

/**
 * ABC and the trained network on one observation, at the same simulation
 * budget as the network's training set. Both are scored by W1 to the
 * closed-form posterior when the model has one, and by W1 between the two
 * methods otherwise. Wall times are kept out of to_json() so the report is
 * reproducible; timing_json() returns them.
 */
struct ComparisonReport {
    nlohmann::json abc_config;
    std::vector<double> observed;
    RejectionResult abc;
    MethodSummary abc_method;
    MethodSummary network;
    std::optional<double> w1_between;
    std::size_t draws = 0;

    nlohmann::json to_json() const;
    nlohmann::json timing_json() const;
};

ComparisonReport budget_matched_compare(const sim::ForwardModel& model, std::span<const double> y_obs,
                                        const AbcConfig& config, const nets::QuantileModel& trained, std::size_t m,
                                        std::uint64_t seed, unsigned threads = 1);

}  // namespace invbayes::abc
