#include "invbayes/oracles/rejection.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace invbayes::oracles {

std::vector<double> SimulationTable::summary_sd() const {
    const std::size_t n = size();
    std::vector<double> mean(summary_dim, 0.0), sd(summary_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < summary_dim; ++j) mean[j] += summaries[i * summary_dim + j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < summary_dim; ++j) {
            const double d = summaries[i * summary_dim + j] - mean[j];
            sd[j] += d * d;
        }
    }
    for (auto& s : sd) {
        s = std::sqrt(s / static_cast<double>(n));
        if (!(s > 0.0)) s = 1.0;
    }
    return sd;
}

SimulationTable simulate_table(const sim::ForwardModel& model, const SummaryFn& summary, std::size_t budget,
                               std::uint64_t seed, unsigned threads) {
    if (budget < 1) throw std::invalid_argument("simulation budget must be at least 1");
    const Rng root(seed);
    SimulationTable t;
    t.theta_dim = model.theta_dim;
    {
        Rng probe = root.split(0);
        t.summary_dim = summary(model.draw(probe).y).size();
    }
    t.theta.resize(budget * t.theta_dim);
    t.summaries.resize(budget * t.summary_dim);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng r = root.split(i);
            const auto d = model.draw(r);
            const auto s = summary(d.y);
            if (s.size() != t.summary_dim) throw std::logic_error("summary width changed between draws");
            std::copy(d.theta.begin(), d.theta.end(), t.theta.begin() + static_cast<std::ptrdiff_t>(i * t.theta_dim));
            std::copy(s.begin(), s.end(), t.summaries.begin() + static_cast<std::ptrdiff_t>(i * t.summary_dim));
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(budget, 1024))));
    if (threads == 1) {
        work(0, budget);
        return t;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (budget + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                work(std::min(budget, w * chunk), std::min(budget, (w + 1) * chunk));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return t;
}

std::vector<double> RejectionResult::coordinate(std::size_t j) const {
    if (j >= dim) throw std::out_of_range("coordinate out of range");
    std::vector<double> out(accepted);
    for (std::size_t i = 0; i < accepted; ++i) out[i] = draws[i * dim + j];
    return out;
}

RejectionResult filter_table(const SimulationTable& table, std::span<const double> observed, double epsilon,
                             std::span<const double> scale) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (observed.size() != table.summary_dim) throw std::invalid_argument("observed summary width mismatch");
    if (!scale.empty() && scale.size() != table.summary_dim) throw std::invalid_argument("scale width mismatch");
    RejectionResult r;
    r.dim = table.theta_dim;
    r.budget = table.size();
    r.min_distance = std::numeric_limits<double>::infinity();
    const double eps2 = epsilon * epsilon;
    for (std::size_t i = 0; i < r.budget; ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < table.summary_dim; ++j) {
            double d = table.summaries[i * table.summary_dim + j] - observed[j];
            if (!scale.empty()) d /= scale[j];
            d2 += d * d;
        }
        r.min_distance = std::min(r.min_distance, d2);
        if (d2 < eps2) {
            r.draws.insert(r.draws.end(), table.theta.begin() + static_cast<std::ptrdiff_t>(i * r.dim),
                           table.theta.begin() + static_cast<std::ptrdiff_t>((i + 1) * r.dim));
            ++r.accepted;
        }
    }
    r.min_distance = std::sqrt(r.min_distance);
    r.acceptance_rate = r.budget == 0 ? 0.0 : static_cast<double>(r.accepted) / static_cast<double>(r.budget);
    r.status = r.accepted > 0 ? RejectionResult::Status::ok : RejectionResult::Status::empty;
    return r;
}

RejectionResult rejection_posterior_sampler(const sim::ForwardModel& model, std::span<const double> y_obs,
                                            double epsilon, std::size_t budget, std::uint64_t seed,
                                            unsigned threads) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (budget < 1) throw std::invalid_argument("simulation budget must be at least 1");
    if (!model.sufficient_statistic) {
        throw std::invalid_argument("model '" + model.name + "' exposes no exact sufficient statistic");
    }
    if (y_obs.size() != model.data_dim) throw std::invalid_argument("observation width does not match the model");
    const auto table = simulate_table(model, model.sufficient_statistic, budget, seed, threads);
    return filter_table(table, model.sufficient_statistic(y_obs), epsilon);
}

}  // namespace invbayes::oracles
