#include "deskrl/rng.hpp"

#include "deskrl/errors.hpp"

namespace deskrl {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream_hash)
    : seed_(seed), stream_hash_(stream_hash) {
    const std::uint64_t a = mix64(seed ^ 0x6a09e667f3bcc908ULL);
    const std::uint64_t b = mix64(stream_hash ^ a);
    std::seed_seq seq{
        static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
        static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    gen_.seed(seq);
}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform01() {
    // 53 high bits; avoids distribution objects whose draw sequences are
    // implementation-defined.
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_real(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw contract_violation("uniform_int: lo > hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(gen_()); // full 64-bit range
    return lo + static_cast<std::int64_t>(gen_() % span);
}

std::size_t Rng::sample_discrete(std::span<const double> weights) {
    if (weights.empty()) throw contract_violation("sample_discrete: empty weights");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw contract_violation("sample_discrete: nonpositive total weight");
    const double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1; // rounding fell off the end
}

Rng Rng::child(std::uint64_t index) const {
    return Rng(seed_, mix64(stream_hash_ ^ (index + 1)));
}

Rng seeded_rng(std::uint64_t seed, std::string_view stream) {
    return Rng(seed, fnv1a64(stream));
}

} // namespace deskrl
