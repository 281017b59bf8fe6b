#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "invbayes/nets/model.hpp"
#include "invbayes/sim/forward_model.hpp"

namespace invbayes::metrics {

/// sqrt(mean (prediction - target)^2); throws on empty or unequal inputs.
double rmse(std::span<const double> predictions, std::span<const double> targets);

/**
 * E|X - y| - 1/2 E|X - X'| over the empirical forecast distribution, both
 * expectations taken over all M (resp. M^2) terms. Computed exactly in
 * O(M log M) from the sorted draws. Throws for fewer than 2 draws.
 */
double crps_from_samples(std::span<const double> draws, double observed);

/**
 * Order-statistics W1. Equal sizes: mean |u_(i) - v_(i)|. Unequal sizes:
 * both empirical quantile functions are evaluated at the midpoints of a
 * uniform grid of max(|u|, |v|) cells. Throws on empty input.
 */
double w1_distance(std::span<const double> u, std::span<const double> v);

/// Mean pinball loss of predictions at one level.
double mean_pinball(std::span<const double> predictions, std::span<const double> targets, double tau);

/// Fraction of truths inside [lo, hi]; throws on unequal lengths.
double coverage(std::span<const std::pair<double, double>> intervals, std::span<const double> truths);

struct EvaluationOptions {
    std::vector<double> levels{0.05, 0.5, 0.95};
    std::vector<double> interval_levels{0.9, 0.95};
    std::size_t draws = 200;
    std::uint64_t seed = 0;
    /// Number of leading records whose draws are compared with the oracle.
    std::size_t w1_records = 50;
    /// 0 evaluates every record; otherwise the leading `max_records`.
    std::size_t max_records = 0;

    nlohmann::json to_json() const;
};

/// One line of the residual CSV.
struct ResidualRow {
    std::size_t index = 0;
    std::vector<double> conditioning;
    double truth = 0.0;
    double median = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/**
 * Held-out evaluation of the first parameter coordinate: RMSE of the
 * median prediction, mean per-record CRPS of the posterior draws, mean
 * pinball per level, interval coverage and, when an oracle is supplied,
 * the mean exact W1 to its Gaussian posterior.
 */
struct MetricReport {
    std::size_t records = 0;
    std::size_t draws = 0;
    double rmse = 0.0;
    double crps = 0.0;
    std::map<std::string, double> pinball;
    std::map<std::string, double> coverage;
    std::optional<double> w1;
    std::size_t w1_records = 0;
    nlohmann::json config;

    nlohmann::json to_json() const;
};

/// Level formatted as a stable JSON key ("0.05").
std::string level_key(double level);

MetricReport evaluate_model(const nets::QuantileModel& model, const sim::TripleDataset& test,
                            const EvaluationOptions& options, const sim::ForwardModel* oracle = nullptr,
                            std::vector<ResidualRow>* residuals = nullptr);

/// index,cond_0..,truth,median,lo,hi
void write_residuals_csv(std::span<const ResidualRow> rows, const std::filesystem::path& path);

}  // namespace invbayes::metrics
