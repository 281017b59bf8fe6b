#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "invbayes/sim/forward_model.hpp"

namespace invbayes::oracles {

using SummaryFn = std::function<std::vector<double>(std::span<const double> y)>;

/// `budget` simulated (theta, s(y)) pairs; pair i uses Rng(seed).split(i).
struct SimulationTable {
    std::size_t theta_dim = 0;
    std::size_t summary_dim = 0;
    std::vector<double> theta;
    std::vector<double> summaries;

    std::size_t size() const { return theta_dim == 0 ? 0 : theta.size() / theta_dim; }
    /// Population standard deviation of each summary column (1 where it is 0).
    std::vector<double> summary_sd() const;
};

/// Simulation is sharded over `threads` workers; the table does not depend
/// on the worker count.
SimulationTable simulate_table(const sim::ForwardModel& model, const SummaryFn& summary, std::size_t budget,
                               std::uint64_t seed, unsigned threads = 1);

struct RejectionResult {
    enum class Status { ok, empty };

    std::size_t dim = 1;
    std::vector<double> draws;
    std::size_t budget = 0;
    std::size_t accepted = 0;
    double acceptance_rate = 0.0;
    /// Smallest distance seen over the whole budget (guides the choice of epsilon).
    double min_distance = 0.0;
    Status status = Status::empty;

    std::vector<double> coordinate(std::size_t j) const;
};

/**
 * Indicator-kernel filter: keeps theta_i with ||(s_i - s_obs) / scale|| < epsilon
 * (Euclidean). An empty `scale` means unit scale.
 */
RejectionResult filter_table(const SimulationTable& table, std::span<const double> observed_summary,
                             double epsilon, std::span<const double> scale = {});

/**
 * Brute-force rejection sampler on the model's exact sufficient statistic
 * with the raw Euclidean distance. Throws std::invalid_argument for
 * epsilon <= 0, budget 0, or a model without a sufficient statistic.
 */
RejectionResult rejection_posterior_sampler(const sim::ForwardModel& model, std::span<const double> y_obs,
                                            double epsilon, std::size_t budget, std::uint64_t seed,
                                            unsigned threads = 1);

}  // namespace invbayes::oracles
