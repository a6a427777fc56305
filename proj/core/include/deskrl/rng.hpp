#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace deskrl {

// Deterministic random stream. Every source of randomness in the library is
// an Rng obtained from seeded_rng(seed, stream) or derived via child(); the
// same (seed, stream) pair reproduces the same draw sequence on every run.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream_hash);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random bits.
    double uniform01();

    // Uniform in [lo, hi).
    double uniform_real(double lo, double hi);

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // Index sampled from a discrete distribution given by nonnegative
    // weights (need not be normalized).
    std::size_t sample_discrete(std::span<const double> weights);

    // Independent stream derived from this one's identity; does not consume
    // state, so child(i) is the same no matter when it is taken.
    Rng child(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_hash() const { return stream_hash_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_hash_;
    std::mt19937_64 gen_;
};

// Named deterministic stream: independent per (seed, stream) pair.
Rng seeded_rng(std::uint64_t seed, std::string_view stream);

// FNV-1a, used for stream labels and vocabulary hashing.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// 64-bit finalizer (splitmix64); good enough stream separation for our use.
std::uint64_t mix64(std::uint64_t x);

} // namespace deskrl
