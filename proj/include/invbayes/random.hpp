#pragma once

#include <cstdint>

namespace invbayes {

/**
 * Counter-based splittable generator.
 *
 * Output i of a stream is a SplitMix64 finalizer applied to (key, i), so a
 * stream can be split into independent child streams by hashing a stream
 * index into a new key. Every record, shard and pipeline stage draws from
 * its own child stream, which keeps results independent of evaluation order
 * and worker count.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    /// Child stream; does not advance this stream.
    Rng split(std::uint64_t stream) const {
        Rng child;
        child.key_ = mix(key_ ^ mix(stream + 0x9e3779b97f4a7c15ULL));
        return child;
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two outputs.
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Derives the seed for one pipeline stage from the top-level run seed.
inline std::uint64_t stage_seed(std::uint64_t run_seed, std::uint64_t stage) {
    return Rng(run_seed).split(stage).next_u64();
}

}  // namespace invbayes
