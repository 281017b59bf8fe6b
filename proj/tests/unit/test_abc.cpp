#include <doctest.h>

#include <cmath>

#include "invbayes/abc/abc.hpp"
#include "invbayes/errors.hpp"
#include "invbayes/metrics/metrics.hpp"
#include "invbayes/sim/builtins.hpp"

using namespace invbayes;
using namespace invbayes::abc;

namespace {

nets::QuantileModel quick_model(const sim::ForwardModel& model, bool summary) {
    const auto ds = sim::simulate_dataset(model, 1000, 4);
    nets::ModelConfig mc;
    mc.preset = "small";
    mc.use_summary = summary;
    mc.summary_hidden = {8};
    nets::QuantileModel qm(mc, ds.dims(), 3);
    nets::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 100;
    qm.fit(ds, cfg);
    return qm;
}

}  // namespace

TEST_CASE("config validation") {
    AbcConfig c;
    CHECK_NOTHROW(c.validate());
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.epsilon = 0.1;
    c.budget = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_summary_source("learned") == SummarySource::learned);
    CHECK_THROWS_AS(parse_summary_source("mean"), ConfigError);
}

TEST_CASE("saturated kernel accepts everything and recovers prior moments") {
    const auto model = sim::builtin_normal_normal(1.0, 4.0, 1.0, 3);
    const std::vector<double> y{0.0, 0.1, 0.2};
    AbcConfig c{1e9, 50000, SummarySource::exact};
    const auto r = abc_posterior(model, y, c, 3);
    CHECK(r.acceptance_rate == 1.0);
    double m = 0, v = 0;
    for (double d : r.draws) m += d;
    m /= r.accepted;
    for (double d : r.draws) v += (d - m) * (d - m);
    v /= r.accepted;
    CHECK(std::abs(m - 1.0) < 4 * 2.0 / std::sqrt(50000.0));
    CHECK(std::abs(v - 4.0) < 0.1);
}

TEST_CASE("same seed gives the same accept set for any worker count") {
    const auto model = sim::builtin_normal_normal(0, 1, 1, 5);
    const std::vector<double> y{0.2, 0.1, -0.3, 0.5, 0.0};
    AbcConfig c{0.1, 20000, SummarySource::exact};
    const auto a = abc_posterior(model, y, c, 8, nullptr, 1);
    const auto b = abc_posterior(model, y, c, 8, nullptr, 5);
    CHECK(a.draws == b.draws);
    CHECK(a.accepted > 0);
}

TEST_CASE("distances use standardized summaries") {
    SimulationTable t;
    t.theta_dim = 1;
    t.summary_dim = 2;
    t.theta = {1, 2, 3, 4};
    t.summaries = {0, 0, 10, 100, -10, -100, 0, 0};
    const auto sd = t.summary_sd();
    CHECK(sd[0] == doctest::Approx(std::sqrt(50.0)));
    CHECK(sd[1] == doctest::Approx(std::sqrt(5000.0)));
    const std::vector<double> obs{10, 100};
    const auto r = abc_filter(t, obs, 1.5);
    CHECK(r.accepted == 1);
    CHECK(r.draws[0] == 2.0);
}

TEST_CASE("nothing accepted gives an empty status with the minimum distance") {
    const auto model = sim::builtin_normal_normal(0, 1, 1, 2);
    const std::vector<double> y{100.0, 100.0};
    const auto r = abc_posterior(model, y, {1e-3, 200, SummarySource::exact}, 1);
    CHECK(r.status == RejectionResult::Status::empty);
    CHECK(r.min_distance > 1.0);
    CHECK(result_to_json(r).at("status") == "empty");
}

TEST_CASE("learned summaries need a summary network") {
    const auto model = sim::builtin_normal_normal(0, 1, 1, 3);
    const std::vector<double> y{0.1, 0.2, 0.3};
    const AbcConfig c{0.5, 1000, SummarySource::learned};
    CHECK_THROWS_AS(abc_posterior(model, y, c, 1), ConfigError);
    const auto plain = quick_model(model, false);
    CHECK_THROWS_AS(abc_posterior(model, y, c, 1, &plain), ConfigError);
    const auto learned = quick_model(model, true);
    const auto r = abc_posterior(model, y, c, 1, &learned);
    CHECK(r.accepted > 0);
    auto id = sim::builtin_identity(1);
    id.sufficient_statistic = nullptr;
    CHECK_THROWS_AS(abc_posterior(id, std::vector<double>{0.0}, {0.1, 10, SummarySource::exact}, 1), ConfigError);
}

TEST_CASE("budget-matched comparison is reproducible and scored against the oracle") {
    const auto model = sim::builtin_normal_normal(0, 1, 1, 3);
    const auto qm = quick_model(model, false);
    const std::vector<double> y{0.5, 0.2, 0.8};
    const AbcConfig c{0.1, 20000, SummarySource::exact};
    const auto a = budget_matched_compare(model, y, c, qm, 500, 7);
    const auto b = budget_matched_compare(model, y, c, qm, 500, 7);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.network.w1_to_oracle.has_value());
    CHECK(a.abc_method.w1_to_oracle.has_value());
    CHECK(a.w1_between.has_value());
    CHECK(a.timing_json().at("abc").contains("seconds_per_effective_sample"));
    CHECK_FALSE(a.to_json().dump().find("seconds") != std::string::npos);
}

TEST_CASE("identical samples are at distance zero") {
    std::vector<double> draws;
    const auto law = oracles::NormalLaw{0.3, 0.7};
    for (int i = 1; i < 200; ++i) draws.push_back(law.quantile(i / 200.0));
    CHECK(metrics::w1_distance(draws, draws) == 0.0);
}
