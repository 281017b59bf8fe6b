#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "invbayes/abc/abc.hpp"
#include "invbayes/metrics/metrics.hpp"
#include "invbayes/nets/model.hpp"

namespace invbayes::cli {

inline constexpr int kConfigVersion = 1;

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kDivergence = 4 };

/// Stage indices fed to stage_seed() so every stage draws from its own stream.
enum Stage : std::uint64_t {
    kStageSimulate = 1,
    kStageTestSet = 2,
    kStageInit = 3,
    kStageTrain = 4,
    kStageSample = 5,
    kStageEvaluate = 6,
    kStageFunctional = 7,
    kStageAbc = 8,
};

/**
 * Effective run configuration: built-in defaults, then the JSON config file,
 * then command-line flags.
 */
struct RunConfig {
    nlohmann::json model = {{"name", "normal_normal"}};
    std::size_t n = 10000;
    std::size_t test_n = 0;
    nets::ModelConfig network;
    nets::TrainConfig train;
    metrics::EvaluationOptions evaluation;
    std::size_t draws = 1000;
    double interval = 0.95;
    bool sorted = false;
    std::vector<double> observed;
    std::string transform = "identity";
    std::size_t functional_n = 1000;
    std::size_t coordinate = 0;
    abc::AbcConfig abc;
    std::uint64_t seed = 0;
    std::string out = "run";
    unsigned threads = 1;

    /// Throws ConfigError on unknown keys, wrong types or a bad version.
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// FNV-1a hash of the configuration without `out` and `threads`.
    std::string hash() const;
};

RunConfig load_run_config(const std::string& path);

/// Parses "a,b,c" into numbers; throws ConfigError on bad input.
std::vector<double> parse_number_list(const std::string& text);

/// Runs one subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace invbayes::cli
