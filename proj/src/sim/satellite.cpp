#include "invbayes/sim/satellite.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>

#include "invbayes/errors.hpp"
#include "invbayes/random.hpp"

namespace invbayes::sim {

using std::numbers::pi;

const std::array<InputRange, kSatelliteInputs>& satellite_input_ranges() {
    static const std::array<InputRange, kSatelliteInputs> ranges{{
        {"velocity", 5500.0, 9500.0},
        {"surface_temperature", 100.0, 500.0},
        {"atmospheric_temperature", 200.0, 2000.0},
        {"yaw", -pi, pi},
        {"pitch", -pi / 2.0, pi / 2.0},
        {"normal_energy_ac", 0.0, 1.0},
        {"tangential_momentum_ac", 0.0, 1.0},
    }};
    return ranges;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        // trim
        auto b = field.find_first_not_of(" \t\"");
        auto e = field.find_last_not_of(" \t\"\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size() && std::isfinite(v);
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_fraction,
                                                                            std::uint64_t seed) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
        throw std::invalid_argument("train_fraction must lie in [0, 1]");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return {std::move(train), std::move(test)};
}

SatelliteData load_satellite_csv(const std::filesystem::path& path, double train_fraction, std::uint64_t seed,
                                 const SatelliteColumns& columns) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open satellite file '" + path.string() + "'");
    const std::string file = path.string();
    const auto& ranges = satellite_input_ranges();

    auto input_cols = columns.inputs;
    auto drag_col = columns.drag;

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    std::size_t clamped = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (first) {
            first = false;
            double probe;
            if (!parse_number(fields.front(), probe)) {
                // Header line.
                if (!columns.header_names.empty()) {
                    if (columns.header_names.size() != kSatelliteInputs + 1) {
                        throw ConfigError("satellite header mapping needs 8 names (7 inputs then drag)");
                    }
                    auto locate = [&](const std::string& name) {
                        auto it = std::find(fields.begin(), fields.end(), name);
                        if (it == fields.end()) throw ParseError(file, 1, "column '" + name + "' not in header");
                        return static_cast<std::size_t>(it - fields.begin());
                    };
                    for (std::size_t j = 0; j < kSatelliteInputs; ++j) input_cols[j] = locate(columns.header_names[j]);
                    drag_col = locate(columns.header_names.back());
                }
                continue;
            }
        }
        const std::size_t needed = std::max(drag_col, *std::max_element(input_cols.begin(), input_cols.end())) + 1;
        if (fields.size() < needed) {
            throw ParseError(file, line_no,
                             "expected at least " + std::to_string(needed) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        std::vector<double> rec(kSatelliteInputs + 1);
        for (std::size_t j = 0; j < kSatelliteInputs; ++j) {
            double v;
            if (!parse_number(fields[input_cols[j]], v)) {
                throw ParseError(file, line_no, "malformed value for " + ranges[j].name);
            }
            double s = ranges[j].scale(v);
            if (s < 0.0 || s > 1.0) {
                s = std::clamp(s, 0.0, 1.0);
                ++clamped;
            }
            rec[j] = s;
        }
        if (!parse_number(fields[drag_col], rec.back())) throw ParseError(file, line_no, "malformed drag value");
        rows.push_back(std::move(rec));
    }
    if (rows.empty()) throw ParseError(file, line_no, "satellite file contains no data rows");
    if (clamped > 0) {
        std::cerr << "warning: clamped " << clamped << " out-of-range satellite input value(s) in " << file << "\n";
    }

    TripleDataset all(DatasetDims{1, kSatelliteInputs, 1, 0});
    all.reserve(rows.size());
    Rng tau_root = Rng(seed).split(1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Rng r = tau_root.split(i);
        const double tau = r.uniform();
        std::span<const double> rec(rows[i]);
        all.append(rec.subspan(kSatelliteInputs, 1), rec.subspan(0, kSatelliteInputs), std::span(&tau, 1));
    }
    all.model = {{"name", "satellite_csv"}, {"path", file}};
    all.seed = seed;
    all.created = utc_timestamp();

    auto [train_idx, test_idx] = split_indices(rows.size(), train_fraction, Rng(seed).split(0).next_u64());
    SatelliteData out;
    out.train = all.subset(train_idx);
    out.test = all.subset(test_idx);
    out.rows = rows.size();
    out.clamped_values = clamped;
    return out;
}

}  // namespace invbayes::sim
