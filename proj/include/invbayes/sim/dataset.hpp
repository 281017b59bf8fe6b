#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "invbayes/sim/forward_model.hpp"

namespace invbayes::sim {

struct DatasetDims {
    std::size_t theta = 1;
    std::size_t data = 1;
    std::size_t tau = 1;
    std::size_t latent = 0;

    friend bool operator==(const DatasetDims&, const DatasetDims&) = default;
};

struct TrainingTriple {
    Vector theta;
    Vector y;
    Vector tau;
    Vector z;
};

/**
 * Simulated (theta, y, tau[, z]) records, stored column-block per field and
 * row-major within each block.
 */
class TripleDataset {
public:
    TripleDataset() = default;
    explicit TripleDataset(DatasetDims dims) : dims_(dims) {}

    const DatasetDims& dims() const { return dims_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    void reserve(std::size_t n);
    void append(ConstVec theta, ConstVec y, ConstVec tau, ConstVec z = {});

    ConstVec theta(std::size_t i) const { return {theta_.data() + i * dims_.theta, dims_.theta}; }
    ConstVec y(std::size_t i) const { return {y_.data() + i * dims_.data, dims_.data}; }
    ConstVec tau(std::size_t i) const { return {tau_.data() + i * dims_.tau, dims_.tau}; }
    ConstVec z(std::size_t i) const { return {z_.data() + i * dims_.latent, dims_.latent}; }
    TrainingTriple record(std::size_t i) const;

    /// y followed by z for record i.
    Vector conditioning(std::size_t i) const;
    std::size_t conditioning_dim() const { return dims_.data + dims_.latent; }

    /// Records at the given indices, in that order; metadata is copied.
    TripleDataset subset(std::span<const std::size_t> indices) const;

    nlohmann::json model;
    std::uint64_t seed = 0;
    std::string created;

    friend bool operator==(const TripleDataset& a, const TripleDataset& b) {
        return a.dims_ == b.dims_ && a.count_ == b.count_ && a.theta_ == b.theta_ && a.y_ == b.y_ &&
               a.tau_ == b.tau_ && a.z_ == b.z_;
    }

private:
    DatasetDims dims_;
    std::size_t count_ = 0;
    std::vector<double> theta_;
    std::vector<double> y_;
    std::vector<double> tau_;
    std::vector<double> z_;
};

/**
 * N iid triples. Record i draws from its own stream Rng(seed).split(i), so
 * the output does not depend on `threads`. tau has one uniform per theta
 * coordinate.
 */
TripleDataset simulate_dataset(const ForwardModel& model, std::size_t n, std::uint64_t seed,
                               unsigned threads = 1);

/// Dataset CSV ("theta_0..,y_0..,tau_0..[,z_0..]") plus `<path>.meta.json`.
void save_dataset(const TripleDataset& ds, const std::filesystem::path& path);
TripleDataset load_dataset(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

inline constexpr int kDatasetFormatVersion = 1;

/// ISO-8601 UTC time, used only in metadata sidecars.
std::string utc_timestamp();

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace invbayes::sim
