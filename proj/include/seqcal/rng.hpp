#pragma once

#include <cstdint>
#include <random>

namespace seqcal {

/// Deterministic random source used throughout the toolkit.
///
/// All randomness flows through this wrapper so that runs are reproducible:
/// identical seeds give identical streams, and doubles are produced by bit
/// manipulation rather than distribution objects whose rounding is
/// implementation defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Bernoulli draw: 1 with probability q.
    int bernoulli(double q) { return uniform() < q ? 1 : 0; }

    /// Fair coin in {0, 1}.
    int coin() { return static_cast<int>(gen_() >> 63); }

    /// Uniform integer in [lo, hi] inclusive (rejection sampling, unbiased).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(gen_());  // full 64-bit range
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return lo + static_cast<std::int64_t>(v % span);
    }

private:
    std::mt19937_64 gen_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Per-trial, per-stream seed derivation.
///
/// Every trial of an experiment draws from streams derived deterministically
/// from (master seed, trial index, stream id); stream ids separate the
/// players of a game (0 = forecaster, 1 = adversary) and other consumers so
/// adding draws to one stream never perturbs another.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream) {
    std::uint64_t z = detail::splitmix64(master ^ 0x6a09e667f3bcc908ull);
    z = detail::splitmix64(z + 0x9e3779b97f4a7c15ull * (trial + 1));
    z = detail::splitmix64(z + 0xbf58476d1ce4e5b9ull * (stream + 1));
    return z;
}

}  // namespace seqcal
