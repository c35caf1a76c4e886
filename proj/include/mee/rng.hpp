#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace mee {

/// SplitMix64 generator. Small state makes it cheap to create one stream per
/// (seed, unit, tick, phase) key, which is what keeps runs independent of the
/// order in which units are processed.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept : m_state(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (m_state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept { return (*this)() % n; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    double normal(double sigma) {
        std::normal_distribution<double> dist(0.0, sigma);
        return dist(*this);
    }

    std::uint64_t state() const noexcept { return m_state; }

private:
    std::uint64_t m_state;
};

/// Stateless 64-bit finalizer used to derive stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto p : parts) h = mix64(h ^ (p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    return h;
}

/// Phase tags for per-unit streams.
enum class Phase : std::uint64_t {
    Founding = 1,
    Reproduction = 2,
    Mutation = 3,
    Migration = 4,
    Weather = 5,
    Sampling = 6,
};

inline Rng stream_for(std::uint64_t master_seed, std::uint64_t unit_id, std::uint64_t tick, Phase phase) {
    return Rng(derive_key({master_seed, unit_id, tick, static_cast<std::uint64_t>(phase)}));
}

}  // namespace mee
