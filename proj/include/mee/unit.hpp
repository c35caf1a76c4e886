#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "mee/genome.hpp"
#include "mee/neural.hpp"

namespace mee {

/// Gain and sensed volume buckets: the four stream kinds plus "emissions".
inline constexpr std::size_t kBuckets = 5;
inline constexpr std::size_t kEmissionBucket = 4;

/// Per-unit accumulators for the current profile window.
struct ProfileWindow {
    std::int64_t start_tick = 0;
    int ticks = 0;
    std::array<double, kBuckets> gain{};
    std::array<double, kBuckets> volume{};
    double compute_cost = 0.0;
    double maintenance = 0.0;
    std::map<std::uint64_t, double> emitter_gain;  // gain attributed to each emitter id

    bool operator==(const ProfileWindow&) const = default;
};

struct Unit {
    std::uint64_t id = 0;
    int x = 0;
    int y = 0;
    double energy = 0.0;

    Genome genome;     // innate, what offspring inherit
    Genome phenotype;  // working copy shaped by plasticity during the lifetime
    NetState state;

    // Outputs of the cycle that produced state.last_prediction; they are
    // charged and rewarded on the following tick.
    int last_v_repr = 0;
    double last_k_cost = 0.0;
    bool last_corrupt = false;

    std::int64_t birth_tick = 0;
    std::uint64_t parent_a = 0;
    std::uint64_t parent_b = 0;
    int corruptions = 0;

    ProfileWindow window;

    bool operator==(const Unit&) const = default;
};

}  // namespace mee
