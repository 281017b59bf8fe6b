#include "invbayes/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "invbayes/errors.hpp"
#include "invbayes/nets/losses.hpp"
#include "invbayes/oracles/normal.hpp"
#include "invbayes/posterior/posterior.hpp"

namespace invbayes::metrics {

namespace {

void check_pair(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
    if (a == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> targets) {
    check_pair(predictions.size(), targets.size(), "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double d = predictions[i] - targets[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(targets.size()));
}

double crps_from_samples(std::span<const double> draws, double observed) {
    if (draws.size() < 2) throw std::invalid_argument("crps needs at least 2 draws");
    std::vector<double> x(draws.begin(), draws.end());
    std::sort(x.begin(), x.end());
    const double m = static_cast<double>(x.size());
    double abs_err = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        abs_err += std::abs(x[i] - observed);
        spread += (2.0 * static_cast<double>(i + 1) - m - 1.0) * x[i];
    }
    return std::max(0.0, abs_err / m - spread / (m * m));
}

double w1_distance(std::span<const double> u, std::span<const double> v) {
    if (u.empty() || v.empty()) throw std::invalid_argument("w1_distance: empty input");
    std::vector<double> a(u.begin(), u.end()), b(v.begin(), v.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t g = std::max(a.size(), b.size());
    double s = 0.0;
    for (std::size_t k = 0; k < g; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) / static_cast<double>(g);
        const auto ia = std::min(a.size() - 1, static_cast<std::size_t>(mid * static_cast<double>(a.size())));
        const auto ib = std::min(b.size() - 1, static_cast<std::size_t>(mid * static_cast<double>(b.size())));
        s += std::abs(a[ia] - b[ib]);
    }
    return s / static_cast<double>(g);
}

double mean_pinball(std::span<const double> predictions, std::span<const double> targets, double tau) {
    check_pair(predictions.size(), targets.size(), "mean_pinball");
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) s += nets::pinball_loss(targets[i] - predictions[i], tau);
    return s / static_cast<double>(targets.size());
}

double coverage(std::span<const std::pair<double, double>> intervals, std::span<const double> truths) {
    check_pair(intervals.size(), truths.size(), "coverage");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] >= intervals[i].first && truths[i] <= intervals[i].second) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(truths.size());
}

std::string level_key(double level) {
    return sim::format_double(level);
}

nlohmann::json EvaluationOptions::to_json() const {
    return {{"levels", levels},         {"interval_levels", interval_levels}, {"draws", draws},
            {"seed", seed},             {"w1_records", w1_records},           {"max_records", max_records}};
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j = {{"records", records}, {"draws", draws},       {"rmse", rmse},
                        {"crps", crps},       {"pinball", pinball},   {"coverage", coverage},
                        {"w1", w1 ? nlohmann::json(*w1) : nlohmann::json(nullptr)},
                        {"w1_records", w1_records},
                        {"crps_estimator", "E|X-y| - 0.5 E|X-X'| over all draw pairs, per record, averaged"},
                        {"config", config}};
    return j;
}

MetricReport evaluate_model(const nets::QuantileModel& model, const sim::TripleDataset& test,
                            const EvaluationOptions& options, const sim::ForwardModel* oracle,
                            std::vector<ResidualRow>* residuals) {
    if (test.empty()) throw std::invalid_argument("evaluation needs a nonempty test set");
    if (test.conditioning_dim() != model.conditioning_dim() || test.dims().theta != model.theta_dim()) {
        throw ConfigError("test set widths do not match the model");
    }
    if (options.draws < 2) throw ConfigError("evaluation needs at least 2 draws per record");
    for (double l : options.levels) {
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("pinball levels must lie in (0, 1)");
    }
    for (double l : options.interval_levels) {
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("interval levels must lie in (0, 1)");
    }
    const std::size_t n = options.max_records == 0 ? test.size() : std::min(test.size(), options.max_records);
    const std::size_t cdim = model.conditioning_dim();

    std::vector<double> cond(n * cdim), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = test.conditioning(i);
        std::copy(c.begin(), c.end(), cond.begin() + static_cast<std::ptrdiff_t>(i * cdim));
        truth[i] = test.theta(i)[0];
    }
    const auto features = model.features(cond);
    const std::size_t fdim = features.size() / n;

    auto at_level = [&](double level) {
        const std::vector<double> taus(n, level);
        return model.quantiles_at_features(features, 0, taus);
    };
    const auto median = at_level(0.5);

    MetricReport report;
    report.records = n;
    report.draws = options.draws;
    report.rmse = rmse(median, truth);
    for (double l : options.levels) report.pinball[level_key(l)] = mean_pinball(at_level(l), truth, l);

    std::vector<std::vector<std::pair<double, double>>> intervals(options.interval_levels.size(),
                                                                  std::vector<std::pair<double, double>>(n));
    double crps_total = 0.0, w1_total = 0.0;
    std::size_t w1_count = 0;
    const bool use_oracle = oracle && oracle->gaussian_posterior && model.theta_dim() == 1;
    std::vector<double> rows(options.draws * fdim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < options.draws; ++m) {
            std::copy_n(features.begin() + static_cast<std::ptrdiff_t>(i * fdim), fdim,
                        rows.begin() + static_cast<std::ptrdiff_t>(m * fdim));
        }
        Rng rng = Rng(options.seed).split(i);
        std::vector<double> taus(options.draws);
        for (auto& t : taus) t = rng.uniform_open();
        auto draws = model.quantiles_at_features(rows, 0, taus);
        crps_total += crps_from_samples(draws, truth[i]);
        std::sort(draws.begin(), draws.end());
        for (std::size_t k = 0; k < options.interval_levels.size(); ++k) {
            const double l = options.interval_levels[k];
            intervals[k][i] = {posterior::empirical_quantile_sorted(draws, (1.0 - l) / 2.0),
                               posterior::empirical_quantile_sorted(draws, (1.0 + l) / 2.0)};
        }
        if (use_oracle && w1_count < options.w1_records) {
            w1_total += oracles::w1_to_normal(draws, oracle->gaussian_posterior(test.conditioning(i)));
            ++w1_count;
        }
        if (residuals) {
            ResidualRow r;
            r.index = i;
            r.conditioning = test.conditioning(i);
            r.truth = truth[i];
            r.median = median[i];
            if (!intervals.empty()) std::tie(r.lo, r.hi) = intervals.back()[i];
            residuals->push_back(std::move(r));
        }
    }
    report.crps = crps_total / static_cast<double>(n);
    for (std::size_t k = 0; k < options.interval_levels.size(); ++k) {
        report.coverage[level_key(options.interval_levels[k])] = coverage(intervals[k], truth);
    }
    if (w1_count > 0) {
        report.w1 = w1_total / static_cast<double>(w1_count);
        report.w1_records = w1_count;
    }
    report.config = options.to_json();
    return report;
}

void write_residuals_csv(std::span<const ResidualRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const std::size_t cdim = rows.empty() ? 0 : rows.front().conditioning.size();
    std::string line = "index";
    for (std::size_t j = 0; j < cdim; ++j) line += ",cond_" + std::to_string(j);
    line += ",truth,median,lo,hi";
    out << line << '\n';
    for (const auto& r : rows) {
        line = std::to_string(r.index);
        for (double c : r.conditioning) line += "," + sim::format_double(c);
        for (double v : {r.truth, r.median, r.lo, r.hi}) line += "," + sim::format_double(v);
        out << line << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace invbayes::metrics
