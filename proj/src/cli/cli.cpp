#include "invbayes/cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "invbayes/errors.hpp"
#include "invbayes/posterior/posterior.hpp"
#include "invbayes/sim/builtins.hpp"
#include "invbayes/sim/satellite.hpp"

namespace invbayes::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in config section '" + section + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    try {
        check_keys(j, "top level",
                   {"version", "seed", "out", "threads", "model", "simulate", "network", "train", "evaluate", "sample",
                    "functional", "abc", "observed"});
        const int version = j.value("version", kConfigVersion);
        if (version != kConfigVersion) {
            throw ConfigError("config version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kConfigVersion) + ")");
        }
        read(j, "seed", c.seed);
        read(j, "out", c.out);
        read(j, "threads", c.threads);
        read(j, "observed", c.observed);
        if (j.contains("model")) c.model = j.at("model");
        if (j.contains("simulate")) {
            const auto& s = j.at("simulate");
            check_keys(s, "simulate", {"N", "test_N"});
            read(s, "N", c.n);
            read(s, "test_N", c.test_n);
        }
        if (j.contains("network")) {
            check_keys(j.at("network"), "network",
                       {"preset", "kind", "levels", "activation", "alpha", "crossing_penalty", "use_summary",
                        "summary_hidden", "summary_train"});
            c.network = nets::ModelConfig::from_json(j.at("network"));
        }
        if (j.contains("train")) {
            check_keys(j.at("train"), "train",
                       {"epochs", "batch_size", "learning_rate", "final_learning_rate", "beta1", "beta2"});
            c.train = nets::train_config_from_json(j.at("train"));
        }
        if (j.contains("evaluate")) {
            const auto& e = j.at("evaluate");
            check_keys(e, "evaluate", {"levels", "interval_levels", "draws", "w1_records", "max_records"});
            read(e, "levels", c.evaluation.levels);
            read(e, "interval_levels", c.evaluation.interval_levels);
            read(e, "draws", c.evaluation.draws);
            read(e, "w1_records", c.evaluation.w1_records);
            read(e, "max_records", c.evaluation.max_records);
        }
        if (j.contains("sample")) {
            const auto& s = j.at("sample");
            check_keys(s, "sample", {"draws", "interval", "sorted"});
            read(s, "draws", c.draws);
            read(s, "interval", c.interval);
            read(s, "sorted", c.sorted);
        }
        if (j.contains("functional")) {
            const auto& f = j.at("functional");
            check_keys(f, "functional", {"transform", "n", "coordinate"});
            read(f, "transform", c.transform);
            read(f, "n", c.functional_n);
            read(f, "coordinate", c.coordinate);
        }
        if (j.contains("abc")) {
            const auto& a = j.at("abc");
            check_keys(a, "abc", {"epsilon", "budget", "summary"});
            read(a, "epsilon", c.abc.epsilon);
            read(a, "budget", c.abc.budget);
            if (a.contains("summary")) c.abc.source = abc::parse_summary_source(a.at("summary").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

json RunConfig::to_json() const {
    auto train_json = nets::train_config_to_json(train);
    train_json.erase("seed");
    return {{"version", kConfigVersion},
            {"seed", seed},
            {"out", out},
            {"threads", threads},
            {"model", model},
            {"observed", observed},
            {"simulate", {{"N", n}, {"test_N", test_n}}},
            {"network", network.to_json()},
            {"train", train_json},
            {"evaluate",
             {{"levels", evaluation.levels},
              {"interval_levels", evaluation.interval_levels},
              {"draws", evaluation.draws},
              {"w1_records", evaluation.w1_records},
              {"max_records", evaluation.max_records}}},
            {"sample", {{"draws", draws}, {"interval", interval}, {"sorted", sorted}}},
            {"functional", {{"transform", transform}, {"n", functional_n}, {"coordinate", coordinate}}},
            {"abc", {{"epsilon", abc.epsilon}, {"budget", abc.budget}, {"summary", abc::to_string(abc.source)}}}};
}

std::string RunConfig::hash() const {
    auto j = to_json();
    j.erase("out");
    j.erase("threads");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return RunConfig::from_json(j);
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("'" + item + "' is not a number");
        }
    }
    if (out.empty()) throw ConfigError("expected a comma-separated list of numbers");
    return out;
}

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::size_t> n, test_n, epochs, batch_size, draws, functional_n, budget;
    std::optional<double> lr, epsilon, interval;
    std::optional<std::string> dataset, resume, checkpoint, y, levels, transform, preset, kind, summary_source;
    bool sorted = false;
};

RunConfig effective_config(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.out = *f.out;
    if (f.threads) c.threads = *f.threads;
    if (f.n) c.n = *f.n;
    if (f.test_n) c.test_n = *f.test_n;
    if (f.epochs) c.train.epochs = *f.epochs;
    if (f.batch_size) c.train.batch_size = *f.batch_size;
    if (f.lr) {
        const bool constant = c.train.final_learning_rate == c.train.learning_rate;
        c.train.learning_rate = *f.lr;
        if (constant) c.train.final_learning_rate = *f.lr;
    }
    if (f.draws) {
        c.draws = *f.draws;
        c.evaluation.draws = *f.draws;
    }
    if (f.interval) c.interval = *f.interval;
    if (f.sorted) c.sorted = true;
    if (f.y) c.observed = parse_number_list(*f.y);
    if (f.levels) c.evaluation.levels = parse_number_list(*f.levels);
    if (f.transform) c.transform = *f.transform;
    if (f.functional_n) c.functional_n = *f.functional_n;
    if (f.epsilon) c.abc.epsilon = *f.epsilon;
    if (f.budget) c.abc.budget = *f.budget;
    if (f.summary_source) c.abc.source = abc::parse_summary_source(*f.summary_source);
    if (f.preset || f.kind) {
        auto j = c.network.to_json();
        if (f.preset) j["preset"] = *f.preset;
        if (f.kind && *f.kind != j.at("kind").get<std::string>()) {
            j["kind"] = *f.kind;
            j.erase("crossing_penalty");
        }
        c.network = nets::ModelConfig::from_json(j);
    }
    if (c.threads < 1) throw ConfigError("--threads must be at least 1");
    c.train.validate();
    c.abc.validate();
    if (c.n < 1) throw ConfigError("N must be at least 1");
    if (!(c.interval > 0.0 && c.interval < 1.0)) throw ConfigError("interval level must lie in (0, 1)");
    return c;
}

fs::path out_dir(const RunConfig& c) {
    fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

bool is_satellite(const json& model) {
    return model.is_object() && model.value("name", std::string{}) == "satellite_csv";
}

/// The data-generating model named by a descriptor, if it is a builtin.
std::optional<sim::ForwardModel> builtin_oracle(const json& descriptor) {
    if (!descriptor.is_object() || !descriptor.contains("name")) return std::nullopt;
    const auto name = descriptor.value("name", std::string{});
    for (auto b : sim::builtin_names()) {
        if (b == name) return sim::make_builtin(descriptor);
    }
    return std::nullopt;
}

int cmd_simulate(const RunConfig& c) {
    const auto dir = out_dir(c);
    if (is_satellite(c.model)) {
        const auto& m = c.model;
        check_keys(m, "model", {"name", "path", "train_fraction", "header"});
        if (!m.contains("path")) throw ConfigError("satellite_csv model needs a 'path'");
        sim::SatelliteColumns cols;
        if (m.contains("header")) cols.header_names = m.at("header").get<std::vector<std::string>>();
        const double frac = m.value("train_fraction", 0.2);
        const auto data = sim::load_satellite_csv(m.at("path").get<std::string>(), frac,
                                                  stage_seed(c.seed, kStageSimulate), cols);
        sim::save_dataset(data.train, dir / "dataset.csv");
        sim::save_dataset(data.test, dir / "test.csv");
        std::cout << "satellite rows " << data.rows << ": " << data.train.size() << " train, " << data.test.size()
                  << " test, " << data.clamped_values << " clamped values\n";
        return kOk;
    }
    const auto model = sim::make_builtin(c.model);
    const auto ds = sim::simulate_dataset(model, c.n, stage_seed(c.seed, kStageSimulate), c.threads);
    sim::save_dataset(ds, dir / "dataset.csv");
    std::cout << "wrote " << ds.size() << " records to " << (dir / "dataset.csv").string() << "\n";
    if (c.test_n > 0) {
        const auto test = sim::simulate_dataset(model, c.test_n, stage_seed(c.seed, kStageTestSet), c.threads);
        sim::save_dataset(test, dir / "test.csv");
        std::cout << "wrote " << test.size() << " records to " << (dir / "test.csv").string() << "\n";
    }
    return kOk;
}

int cmd_train(const RunConfig& c, const Flags& f) {
    const auto dir = out_dir(c);
    const fs::path dataset = f.dataset ? fs::path(*f.dataset) : dir / "dataset.csv";
    const auto ds = sim::load_dataset(dataset);
    nets::QuantileModel model;
    std::size_t first_epoch = 0;
    if (f.resume) {
        model = nets::load_checkpoint(*f.resume);
        if (!model.train_states().empty()) first_epoch = model.train_states().front().epochs_done;
    } else {
        model = nets::QuantileModel(c.network, ds.dims(), stage_seed(c.seed, kStageInit));
    }
    auto train = c.train;
    train.seed = stage_seed(c.seed, kStageTrain);
    const auto histories = model.fit(ds, train);
    nets::save_checkpoint(model, dir / "model.json");

    std::ofstream out(dir / "loss_history.csv", std::ios::binary);
    if (!out) throw IoError("cannot write loss history");
    out << "epoch";
    if (histories.size() == 1) {
        out << ",loss";
    } else {
        for (std::size_t j = 0; j < histories.size(); ++j) out << ",loss_" << j;
    }
    out << '\n';
    for (std::size_t e = 0; e < histories.front().size(); ++e) {
        out << first_epoch + e;
        for (const auto& h : histories) out << ',' << sim::format_double(h[e]);
        out << '\n';
    }
    if (!model.summary_history().empty() && !f.resume) {
        std::ofstream s(dir / "summary_loss.csv", std::ios::binary);
        s << "epoch,loss\n";
        for (std::size_t e = 0; e < model.summary_history().size(); ++e) {
            s << e << ',' << sim::format_double(model.summary_history()[e]) << '\n';
        }
    }
    std::cout << "trained " << histories.front().size() << " epochs; final loss "
              << histories.front().back() << "; checkpoint " << (dir / "model.json").string() << "\n";
    return kOk;
}

nets::QuantileModel checkpoint_for(const RunConfig& c, const Flags& f) {
    const fs::path path = f.checkpoint ? fs::path(*f.checkpoint) : fs::path(c.out) / "model.json";
    return nets::load_checkpoint(path);
}

void require_observed(const RunConfig& c, const nets::QuantileModel& model) {
    if (c.observed.empty()) throw ConfigError("no observation given (use --y or the config's 'observed')");
    if (c.observed.size() != model.conditioning_dim()) {
        throw ConfigError("observation has " + std::to_string(c.observed.size()) + " values but the model expects " +
                          std::to_string(model.conditioning_dim()));
    }
}

int cmd_sample(const RunConfig& c, const Flags& f) {
    const auto model = checkpoint_for(c, f);
    require_observed(c, model);
    if (c.draws < 1) throw ConfigError("--draws must be at least 1");
    const auto dir = out_dir(c);
    const auto seed = stage_seed(c.seed, kStageSample);
    const auto samples = c.sorted ? posterior::sorted_posterior_pairs(model, c.observed, c.draws, seed)
                                  : posterior::sample_posterior(model, c.observed, c.draws, seed);
    posterior::write_samples_csv(samples, dir / "posterior.csv");
    auto summary = posterior::summarize(samples, c.interval);
    summary["seed"] = seed;
    write_json(dir / "posterior_summary.json", summary);
    std::cout << "wrote " << samples.size() << " draws to " << (dir / "posterior.csv").string() << "\n";
    return kOk;
}

int cmd_evaluate(const RunConfig& c, const Flags& f) {
    const auto model = checkpoint_for(c, f);
    const auto dir = out_dir(c);
    const fs::path dataset = f.dataset ? fs::path(*f.dataset) : dir / "test.csv";
    const auto test = sim::load_dataset(dataset);
    auto options = c.evaluation;
    options.seed = stage_seed(c.seed, kStageEvaluate);
    const auto oracle = builtin_oracle(model.data_model);
    std::vector<metrics::ResidualRow> residuals;
    auto report = metrics::evaluate_model(model, test, options, oracle ? &*oracle : nullptr, &residuals);
    auto j = report.to_json();
    j["config_hash"] = c.hash();
    j["dataset"] = test.model;
    write_json(dir / "metrics.json", j);
    metrics::write_residuals_csv(residuals, dir / "residuals.csv");
    std::cout << "rmse " << report.rmse << " crps " << report.crps << " over " << report.records << " records\n";
    return kOk;
}

int cmd_functional(const RunConfig& c, const Flags& f) {
    const auto model = checkpoint_for(c, f);
    require_observed(c, model);
    if (!posterior::is_known_transform(c.transform)) {
        throw ConfigError("unknown transform '" + c.transform +
                          "' (valid transforms: identity, square, variance, indicator:<t>)");
    }
    if (c.coordinate >= model.theta_dim()) throw ConfigError("coordinate out of range");
    const auto dir = out_dir(c);
    const auto q = posterior::model_quantile_fn(model, c.observed, c.coordinate);
    const auto est =
        posterior::named_functional(q, c.transform, c.functional_n, stage_seed(c.seed, kStageFunctional));
    auto j = est.to_json();
    j["observed"] = c.observed;
    j["coordinate"] = c.coordinate;
    write_json(dir / "functional.json", j);
    std::cout << c.transform << " functional = " << est.value << "\n";
    return kOk;
}

int cmd_abc_compare(const RunConfig& c, const Flags& f) {
    const auto trained = checkpoint_for(c, f);
    require_observed(c, trained);
    const auto model = builtin_oracle(trained.data_model);
    if (!model) throw ConfigError("abc-compare needs a builtin simulator model");
    if (c.observed.size() != model->data_dim) throw ConfigError("observation width does not match the simulator");
    const auto dir = out_dir(c);
    const auto rep = abc::budget_matched_compare(*model, c.observed, c.abc, trained, c.draws,
                                                 stage_seed(c.seed, kStageAbc), c.threads);
    write_json(dir / "abc_report.json", rep.to_json());
    write_json(dir / "abc_timing.json", rep.timing_json());
    abc::write_accepted_csv(rep.abc, dir / "abc_accepted.csv");
    std::cout << "ABC accepted " << rep.abc.accepted << " of " << rep.abc.budget << "\n";
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Simulation-based posterior inference with quantile networks", "invbayes"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&f](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON run configuration");
        sub->add_option("--seed", f.seed, "top-level seed");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--threads", f.threads, "worker cap (does not change results)");
    };

    auto* simulate = app.add_subcommand("simulate", "simulate a training dataset");
    common(simulate);
    simulate->add_option("--n", f.n, "number of records");
    simulate->add_option("--test-n", f.test_n, "records in an extra held-out set");

    auto* train = app.add_subcommand("train", "train the quantile network");
    common(train);
    train->add_option("--dataset", f.dataset, "training CSV (default <out>/dataset.csv)");
    train->add_option("--epochs", f.epochs);
    train->add_option("--batch-size", f.batch_size);
    train->add_option("--lr", f.lr, "learning rate");
    train->add_option("--preset", f.preset, "network preset (small, traffic)");
    train->add_option("--kind", f.kind, "implicit or explicit");
    train->add_option("--resume", f.resume, "checkpoint to continue training from");

    auto* sample = app.add_subcommand("sample", "draw from the learned posterior");
    common(sample);
    sample->add_option("--checkpoint", f.checkpoint, "model checkpoint (default <out>/model.json)");
    sample->add_option("--y", f.y, "observation, comma separated");
    sample->add_option("--draws", f.draws, "number of posterior draws");
    sample->add_option("--interval", f.interval, "credible level of the reported interval");
    sample->add_flag("--sorted", f.sorted, "sort base draws and report monotonicity violations");

    auto* evaluate = app.add_subcommand("evaluate", "score the model on a held-out dataset");
    common(evaluate);
    evaluate->add_option("--checkpoint", f.checkpoint);
    evaluate->add_option("--dataset", f.dataset, "test CSV (default <out>/test.csv)");
    evaluate->add_option("--levels", f.levels, "pinball levels, comma separated");
    evaluate->add_option("--draws", f.draws, "posterior draws per record");

    auto* functional = app.add_subcommand("functional", "trapezoidal posterior functional");
    common(functional);
    functional->add_option("--checkpoint", f.checkpoint);
    functional->add_option("--y", f.y, "observation, comma separated");
    functional->add_option("--transform", f.transform, "identity, square, variance or indicator:<t>");
    functional->add_option("--n", f.functional_n, "number of interior nodes");

    auto* compare = app.add_subcommand("abc-compare", "budget-matched comparison with rejection ABC");
    common(compare);
    compare->add_option("--checkpoint", f.checkpoint);
    compare->add_option("--y", f.y, "observation, comma separated");
    compare->add_option("--epsilon", f.epsilon, "ABC tolerance on standardized summaries");
    compare->add_option("--budget", f.budget, "ABC simulation budget");
    compare->add_option("--draws", f.draws, "network posterior draws");
    compare->add_option("--summary", f.summary_source, "exact or learned");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        const RunConfig c = effective_config(f);
        if (simulate->parsed()) return cmd_simulate(c);
        if (train->parsed()) return cmd_train(c, f);
        if (sample->parsed()) return cmd_sample(c, f);
        if (evaluate->parsed()) return cmd_evaluate(c, f);
        if (functional->parsed()) return cmd_functional(c, f);
        if (compare->parsed()) return cmd_abc_compare(c, f);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDivergence;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("invbayes");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace invbayes::cli
