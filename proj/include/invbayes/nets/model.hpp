#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "invbayes/nets/train.hpp"
#include "invbayes/sim/dataset.hpp"

namespace invbayes::nets {

/// Per-column affine scaling to zero mean and unit variance.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;

    std::size_t dim() const { return mean.size(); }
    /// Columns with zero spread keep sd = 1.
    static Standardizer fit(std::span<const double> rows, std::size_t dim);
    void apply(std::span<double> rows) const;
    void invert(std::span<double> rows) const;

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);
};

enum class NetKind { implicit, explicit_levels };

const char* to_string(NetKind k);
NetKind parse_net_kind(const std::string& name);

/**
 * What to build. With `use_summary`, a summary network S(y) is fitted first
 * and the quantile nets condition on S(y) followed by z instead of y
 * followed by z.
 */
struct ModelConfig {
    std::string preset = "traffic";
    NetKind kind = NetKind::implicit;
    std::vector<double> levels{0.05, 0.5, 0.95};
    Activation activation = Activation::relu;
    LossConfig loss{1.0, 0.0};
    bool use_summary = false;
    std::vector<std::size_t> summary_hidden{32, 32};
    std::optional<TrainConfig> summary_train;

    nlohmann::json to_json() const;
    /// Missing keys keep their defaults; an explicit net without an explicit
    /// crossing penalty gets lambda = 1.
    static ModelConfig from_json(const nlohmann::json& j);
};

/**
 * The learned inverse map: input scaling, optional summary network and one
 * quantile network per parameter coordinate (each coordinate j learns the
 * marginal quantile function of theta_j given the conditioning input, using
 * base draw tau_j). Targets are standardized during training and mapped back
 * on output.
 */
class QuantileModel {
public:
    QuantileModel() = default;
    QuantileModel(ModelConfig config, sim::DatasetDims dims, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    const sim::DatasetDims& dims() const { return dims_; }
    std::size_t conditioning_dim() const { return dims_.data + dims_.latent; }
    std::size_t theta_dim() const { return dims_.theta; }
    std::uint64_t seed() const { return seed_; }
    bool fitted() const { return fitted_; }

    /**
     * Trains on the dataset (scalers and summary are fitted on the first
     * call only, so repeated calls resume training). Returns the per-epoch
     * losses of this call, one history per coordinate network.
     */
    std::vector<std::vector<double>> fit(const sim::TripleDataset& data, const TrainConfig& train);

    /// Summary-network loss history of the first fit call (empty without summary).
    const std::vector<double>& summary_history() const { return summary_history_; }

    /// Network input rows for raw conditioning rows (y followed by z).
    std::vector<double> features(std::span<const double> conditioning_rows) const;

    /// Quantiles of theta_coord at each level for one conditioning vector.
    std::vector<double> quantiles(std::span<const double> conditioning, std::size_t coord,
                                  std::span<const double> taus) const;

    /// One quantile per (feature row, level) pair; rows come from features().
    std::vector<double> quantiles_at_features(std::span<const double> feature_rows, std::size_t coord,
                                              std::span<const double> taus) const;

    /// S(y) for one conditioning vector (without summary, y itself).
    std::vector<double> summary(std::span<const double> y) const;

    const std::vector<ImplicitQuantileNet>& implicit_nets() const { return implicit_; }
    const std::vector<ExplicitQuantileNet>& explicit_nets() const { return explicit_; }
    std::vector<ImplicitQuantileNet>& implicit_nets() { return implicit_; }
    std::vector<ExplicitQuantileNet>& explicit_nets() { return explicit_; }
    const std::vector<TrainState>& train_states() const { return states_; }
    const Standardizer& input_scaler() const { return input_scaler_; }
    const Standardizer& target_scaler() const { return target_scaler_; }

    nlohmann::json to_json() const;
    static QuantileModel from_json(const nlohmann::json& j);

    std::optional<TrainConfig> last_train;
    /// Descriptor of the model that generated the training data (copied from
    /// the dataset on the first fit).
    nlohmann::json data_model;

private:
    std::size_t feature_dim() const;
    std::vector<double> raw_features(std::span<const double> conditioning_rows) const;

    ModelConfig config_;
    sim::DatasetDims dims_;
    std::uint64_t seed_ = 0;
    bool fitted_ = false;

    Standardizer input_scaler_;
    Standardizer target_scaler_;
    Standardizer summary_scaler_;
    std::optional<SummaryNet> summary_;
    TrainState summary_state_;
    std::vector<double> summary_history_;

    std::vector<ImplicitQuantileNet> implicit_;
    std::vector<ExplicitQuantileNet> explicit_;
    std::vector<TrainState> states_;
};

inline constexpr int kCheckpointVersion = 1;

/// JSON checkpoint; weights and optimizer moments round-trip bit-exactly.
void save_checkpoint(const QuantileModel& model, const std::filesystem::path& path);
QuantileModel load_checkpoint(const std::filesystem::path& path);

}  // namespace invbayes::nets
