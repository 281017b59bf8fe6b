#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "invbayes/sim/dataset.hpp"

namespace invbayes::sim {

/// Physical range of one simulator input; values are min-max scaled to [0, 1].
struct InputRange {
    std::string name;
    double lo;
    double hi;

    double scale(double v) const { return (v - lo) / (hi - lo); }
};

inline constexpr std::size_t kSatelliteInputs = 7;

/// Input ranges in column order: velocity, surface temperature, atmospheric
/// temperature, yaw, pitch, normal energy AC, tangential momentum AC.
const std::array<InputRange, kSatelliteInputs>& satellite_input_ranges();

/**
 * Where each field lives in the CSV. `inputs[j]` is the column index of the
 * j-th input of satellite_input_ranges(); `drag` the response column. The
 * default is the range order followed by drag. When `header_names` is set,
 * columns are located by name in the header instead.
 */
struct SatelliteColumns {
    std::array<std::size_t, kSatelliteInputs> inputs{0, 1, 2, 3, 4, 5, 6};
    std::size_t drag = 7;
    std::vector<std::string> header_names;  // 8 names: inputs then drag
};

struct SatelliteData {
    TripleDataset train;
    TripleDataset test;
    std::size_t rows = 0;
    std::size_t clamped_values = 0;
};

/**
 * Reads the exported simulator table. Rows become triples with theta = drag
 * and y = the seven scaled inputs; out-of-range inputs are clamped and
 * counted. Rows are split by a seeded shuffle; the training part holds
 * round(train_fraction * rows) records.
 */
SatelliteData load_satellite_csv(const std::filesystem::path& path, double train_fraction, std::uint64_t seed,
                                 const SatelliteColumns& columns = {});

/// Seeded train/test index split shared by the satellite and stand-in paths.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_fraction,
                                                                            std::uint64_t seed);

}  // namespace invbayes::sim
