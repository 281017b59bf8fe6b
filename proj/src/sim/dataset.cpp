#include "invbayes/sim/dataset.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "invbayes/errors.hpp"

namespace invbayes::sim {

namespace fs = std::filesystem;

void TripleDataset::reserve(std::size_t n) {
    theta_.reserve(n * dims_.theta);
    y_.reserve(n * dims_.data);
    tau_.reserve(n * dims_.tau);
    z_.reserve(n * dims_.latent);
}

void TripleDataset::append(ConstVec theta, ConstVec y, ConstVec tau, ConstVec z) {
    if (theta.size() != dims_.theta || y.size() != dims_.data || tau.size() != dims_.tau ||
        z.size() != dims_.latent) {
        throw std::invalid_argument("TripleDataset::append: record widths do not match dataset dims");
    }
    for (double t : tau) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("TripleDataset::append: tau outside [0, 1]");
    }
    theta_.insert(theta_.end(), theta.begin(), theta.end());
    y_.insert(y_.end(), y.begin(), y.end());
    tau_.insert(tau_.end(), tau.begin(), tau.end());
    z_.insert(z_.end(), z.begin(), z.end());
    ++count_;
}

TrainingTriple TripleDataset::record(std::size_t i) const {
    auto t = theta(i), yy = y(i), ta = tau(i), zz = z(i);
    return {{t.begin(), t.end()}, {yy.begin(), yy.end()}, {ta.begin(), ta.end()}, {zz.begin(), zz.end()}};
}

Vector TripleDataset::conditioning(std::size_t i) const {
    Vector out;
    out.reserve(conditioning_dim());
    auto yy = y(i), zz = z(i);
    out.insert(out.end(), yy.begin(), yy.end());
    out.insert(out.end(), zz.begin(), zz.end());
    return out;
}

TripleDataset TripleDataset::subset(std::span<const std::size_t> indices) const {
    TripleDataset out(dims_);
    out.model = model;
    out.seed = seed;
    out.created = created;
    out.reserve(indices.size());
    for (auto i : indices) out.append(theta(i), y(i), tau(i), z(i));
    return out;
}

TripleDataset simulate_dataset(const ForwardModel& model, std::size_t n, std::uint64_t seed, unsigned threads) {
    if (n < 1) throw std::invalid_argument("simulate_dataset: N must be at least 1");
    const DatasetDims dims{model.theta_dim, model.data_dim, model.theta_dim, model.latent_dim};
    const Rng root(seed);

    std::vector<Draw> draws(n);
    std::vector<Vector> taus(n);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng record = root.split(i);
            Rng sim_stream = record.split(0);
            Rng tau_stream = record.split(1);
            draws[i] = model.draw(sim_stream);
            taus[i].resize(dims.tau);
            for (auto& t : taus[i]) t = tau_stream.uniform();
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        const std::size_t chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    work(std::min(n, t * chunk), std::min(n, (t + 1) * chunk));
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    TripleDataset ds(dims);
    ds.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ds.append(draws[i].theta, draws[i].y, taus[i], draws[i].z);
    ds.model = model.descriptor;
    ds.seed = seed;
    ds.created = utc_timestamp();
    return ds;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

fs::path sidecar_path(const fs::path& csv_path) {
    return fs::path(csv_path.string() + ".meta.json");
}

void save_dataset(const TripleDataset& ds, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const auto& d = ds.dims();
    std::string line;
    auto header = [&](const char* prefix, std::size_t count) {
        for (std::size_t j = 0; j < count; ++j) {
            if (!line.empty()) line += ',';
            line += prefix;
            line += std::to_string(j);
        }
    };
    header("theta_", d.theta);
    header("y_", d.data);
    header("tau_", d.tau);
    header("z_", d.latent);
    out << line << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        line.clear();
        for (auto block : {ds.theta(i), ds.y(i), ds.tau(i), ds.z(i)}) {
            for (double v : block) {
                if (!line.empty()) line += ',';
                line += format_double(v);
            }
        }
        out << line << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");

    nlohmann::json meta = {
        {"version", kDatasetFormatVersion},
        {"model", ds.model},
        {"dims", {{"theta", d.theta}, {"y", d.data}, {"tau", d.tau}, {"z", d.latent}}},
        {"seed", ds.seed},
        {"N", ds.size()},
        {"created", ds.created},
    };
    std::ofstream side(sidecar_path(path));
    if (!side) throw IoError("cannot write metadata sidecar for '" + path.string() + "'");
    side << meta.dump(2) << '\n';
}

namespace {

DatasetDims parse_header(const std::string& header, const std::string& file) {
    DatasetDims dims{0, 0, 0, 0};
    std::stringstream ss(header);
    std::string col;
    int stage = 0;
    auto expect = [&](const std::string& prefix, std::size_t& count, int s) {
        if (col.rfind(prefix, 0) != 0) return false;
        if (stage > s) throw ParseError(file, 1, "column '" + col + "' out of order");
        stage = s;
        if (col != prefix + std::to_string(count)) throw ParseError(file, 1, "unexpected column '" + col + "'");
        ++count;
        return true;
    };
    while (std::getline(ss, col, ',')) {
        if (!col.empty() && col.back() == '\r') col.pop_back();
        if (expect("theta_", dims.theta, 0) || expect("y_", dims.data, 1) || expect("tau_", dims.tau, 2) ||
            expect("z_", dims.latent, 3)) {
            continue;
        }
        throw ParseError(file, 1, "unknown column '" + col + "'");
    }
    if (dims.theta == 0 || dims.tau == 0) throw ParseError(file, 1, "header lacks theta_ or tau_ columns");
    return dims;
}

}  // namespace

TripleDataset load_dataset(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
    const std::string file = path.string();

    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 1, "missing header");
    const DatasetDims dims = parse_header(line, file);
    const std::size_t width = dims.theta + dims.data + dims.tau + dims.latent;

    TripleDataset ds(dims);
    std::vector<double> row(width);
    std::size_t line_no = 1;
    bool saw_newline_at_end = true;
    while (std::getline(in, line)) {
        ++line_no;
        saw_newline_at_end = !in.eof();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t j = 0; j < width; ++j) {
            auto [next, ec] = std::from_chars(p, end, row[j]);
            if (ec != std::errc()) {
                throw ParseError(file, line_no, "bad number in column " + std::to_string(j));
            }
            p = next;
            if (j + 1 < width) {
                if (p == end || *p != ',') {
                    throw ParseError(file, line_no,
                                     "expected " + std::to_string(width) + " fields, got " + std::to_string(j + 1));
                }
                ++p;
            }
        }
        if (p != end) throw ParseError(file, line_no, "trailing data after " + std::to_string(width) + " fields");
        std::span<const double> r(row);
        try {
            ds.append(r.subspan(0, dims.theta), r.subspan(dims.theta, dims.data),
                      r.subspan(dims.theta + dims.data, dims.tau),
                      r.subspan(dims.theta + dims.data + dims.tau, dims.latent));
        } catch (const std::invalid_argument& e) {
            throw ParseError(file, line_no, e.what());
        }
    }
    if (!saw_newline_at_end) throw ParseError(file, line_no, "file truncated (last record has no line terminator)");

    const auto side = sidecar_path(path);
    if (fs::exists(side)) {
        std::ifstream sin(side);
        nlohmann::json meta;
        try {
            sin >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(side.string(), 1, std::string("invalid metadata: ") + e.what());
        }
        const int version = meta.value("version", -1);
        if (version != kDatasetFormatVersion) {
            throw IoError("dataset metadata version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kDatasetFormatVersion) + ")");
        }
        const auto n = meta.value("N", std::size_t{0});
        if (n != ds.size()) {
            throw ParseError(file, line_no,
                             "metadata records N=" + std::to_string(n) + " but file has " + std::to_string(ds.size()) +
                                 " rows (truncated?)");
        }
        ds.model = meta.value("model", nlohmann::json::object());
        ds.seed = meta.value("seed", std::uint64_t{0});
        ds.created = meta.value("created", std::string{});
    }
    if (ds.empty()) throw ParseError(file, line_no, "dataset has no records");
    return ds;
}

}  // namespace invbayes::sim
