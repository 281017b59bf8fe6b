#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "invbayes/errors.hpp"
#include "invbayes/oracles/conjugate.hpp"
#include "invbayes/oracles/normal.hpp"
#include "invbayes/posterior/posterior.hpp"
#include "invbayes/sim/builtins.hpp"

using namespace invbayes;
using namespace invbayes::posterior;

namespace {

nets::QuantileModel small_trained_model(std::uint64_t seed = 1) {
    const auto model = sim::builtin_normal_normal(0, 1, 1, 2);
    const auto ds = sim::simulate_dataset(model, 500, seed);
    nets::ModelConfig mc;
    mc.preset = "small";
    nets::QuantileModel qm(mc, ds.dims(), seed);
    nets::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 100;
    qm.fit(ds, cfg);
    return qm;
}

QuantileFn normal_q(double mean, double sd) {
    return [mean, sd](std::span<const double> taus) {
        std::vector<double> out;
        for (double t : taus) out.push_back(mean + sd * oracles::normal_quantile(t));
        return out;
    };
}

}  // namespace

TEST_CASE("net ignoring tau gives identical draws") {
    auto qm = small_trained_model();
    auto& p = qm.implicit_nets()[0].params();
    std::fill(p.at("phi.W").data().begin(), p.at("phi.W").data().end(), 0.0);
    std::fill(p.at("phi.b").data().begin(), p.at("phi.b").data().end(), 0.3);
    const std::vector<double> y{0.4, -0.2};
    const auto s = sample_posterior(qm, y, 50, 3);
    CHECK(s.size() == 50);
    for (double v : s.draws) CHECK(v == s.draws[0]);
    const auto sorted = sorted_posterior_pairs(qm, y, 50, 3);
    CHECK(sorted.violations == 0);
    const auto q = model_quantile_fn(qm, y);
    const auto est = named_functional(q, "identity", 100, 4);
    CHECK(est.value == doctest::Approx(s.draws[0]).epsilon(1e-12));
}

TEST_CASE("sampling is reproducible and the sorted variant permutes the same draws") {
    const auto qm = small_trained_model();
    const std::vector<double> y{0.4, -0.2};
    const auto a = sample_posterior(qm, y, 200, 9);
    const auto b = sample_posterior(qm, y, 200, 9);
    CHECK(a.draws == b.draws);
    CHECK(a.taus == b.taus);
    const auto s = sorted_posterior_pairs(qm, y, 200, 9);
    CHECK(s.sorted);
    CHECK(std::is_sorted(s.taus.begin(), s.taus.end()));
    auto x = a.draws, z = s.draws;
    std::sort(x.begin(), x.end());
    std::sort(z.begin(), z.end());
    CHECK(x == z);
    std::size_t drops = 0;
    for (std::size_t i = 1; i < s.draws.size(); ++i) drops += s.draws[i] < s.draws[i - 1];
    CHECK(drops == s.violations);
}

TEST_CASE("width mismatch is a shape error") {
    const auto qm = small_trained_model();
    const std::vector<double> y{0.4, -0.2, 1.0};
    CHECK_THROWS_AS(sample_posterior(qm, y, 10, 1), ad::ShapeError);
}

TEST_CASE("monotone quantile function reports no violations") {
    const auto s = sample_quantile_fn(normal_q(1.0, 2.0), 500, 2, true);
    CHECK(s.violations == 0);
    CHECK(std::is_sorted(s.draws.begin(), s.draws.end()));
    CHECK(s.violation_fraction() == 0.0);
}

TEST_CASE("empirical quantile convention") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    const auto [lo, hi] = credible_interval(v, 0.9);
    CHECK(lo == doctest::Approx(5.95).epsilon(1e-14));
    CHECK(hi == doctest::Approx(95.05).epsilon(1e-14));
    CHECK(std::abs(lo - 5.5) <= 0.5);
    CHECK(std::abs(hi - 95.5) <= 0.5);
    CHECK(empirical_quantile(v, 0.0) == 1.0);
    CHECK(empirical_quantile(v, 1.0) == 100.0);
    CHECK(empirical_quantile(v, 0.5) == 50.5);
    const std::vector<double> c(20, 3.25);
    const auto [clo, chi] = credible_interval(c, 0.9);
    CHECK(clo == 3.25);
    CHECK(chi == 3.25);
    CHECK_THROWS_AS(credible_interval(std::vector<double>(5, 1.0), 0.9), std::invalid_argument);
    CHECK_THROWS_AS(credible_interval(v, 1.0), std::invalid_argument);
}

TEST_CASE("trapezoid nodes") {
    const auto y = trapezoid_nodes(10, 3);
    REQUIRE(y.size() == 12);
    CHECK(y.front() == 0.0);
    CHECK(y.back() == 1.0);
    CHECK(std::is_sorted(y.begin(), y.end()));
}

TEST_CASE("trapezoid functional is exact for constant and linear quantile functions") {
    const QuantileFn one = [](std::span<const double> t) { return std::vector<double>(t.size(), 1.0); };
    const QuantileFn lin = [](std::span<const double> t) { return std::vector<double>(t.begin(), t.end()); };
    const Transform id = [](double x) { return x; };
    for (std::size_t n : {1, 7, 100}) {
        for (std::uint64_t seed : {1, 2, 3}) {
            CHECK(trapezoid_functional(one, id, n, seed).value == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(trapezoid_functional(lin, id, n, seed).value == doctest::Approx(0.5).epsilon(1e-14));
        }
    }
}

TEST_CASE("trapezoid functional on the conjugate posterior") {
    const auto cp = oracles::conjugate_posterior(0.0, 1.0, 1.0, 1.0, 2.0);
    const auto q = normal_q(cp.mean, cp.sd());
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto est = named_functional(q, "identity", 1000, seed);
        worst = std::max(worst, std::abs(est.value - 1.0));
        CHECK(est.n == 1000);
        CHECK(est.seed == seed);
        CHECK(est.delta == 1e-6);
    }
    CHECK(worst < 2e-3);
    const auto var = named_functional(q, "variance", 2000, 5);
    CHECK(std::abs(var.value - 0.5) < 0.01);
    const auto sq = named_functional(q, "square", 2000, 5);
    CHECK(std::abs(sq.value - 1.5) < 0.01);
}

TEST_CASE("indicator functional recovers the posterior cdf") {
    const auto q = normal_q(1.0, std::sqrt(0.5));
    const auto draws = sample_quantile_fn(q, 20000, 8, false);
    for (double t : {0.0, 0.8, 1.5}) {
        const auto est = named_functional(q, "indicator:" + std::to_string(t), 2000, 6);
        const double exact = oracles::normal_cdf((t - 1.0) / std::sqrt(0.5));
        double emp = 0;
        for (double d : draws.draws) emp += d <= t;
        emp /= 20000.0;
        CHECK(std::abs(est.value - exact) < 3e-3);
        CHECK(std::abs(est.value - emp) < 4 * std::sqrt(exact * (1 - exact) / 20000.0) + 3e-3);
    }
}

TEST_CASE("unknown transforms are rejected") {
    const auto q = normal_q(0, 1);
    CHECK_THROWS_AS(named_functional(q, "cube", 10, 1), ConfigError);
    CHECK_THROWS_AS(named_functional(q, "indicator:abc", 10, 1), ConfigError);
    CHECK(is_known_transform("indicator:-0.5"));
    CHECK_FALSE(is_known_transform("log"));
}

TEST_CASE("sample csv and summary") {
    const auto s = sample_quantile_fn(normal_q(0, 1), 100, 4, false);
    const auto path = std::filesystem::temp_directory_path() / "invbayes_post.csv";
    write_samples_csv(s, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "tau,theta_0");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 100);
    std::filesystem::remove(path);
    const auto j = summarize(s, 0.9);
    const auto& c = j.at("coordinates")[0];
    const double med = c.at("quantiles").at("0.5").get<double>();
    CHECK(med >= c.at("min").get<double>());
    CHECK(med <= c.at("max").get<double>());
    CHECK(c.at("interval").at("level").get<double>() == 0.9);
}
