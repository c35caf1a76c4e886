#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mee/genome.hpp"
#include "mee/unit.hpp"

namespace mee {

/// A unit's accumulated gain and sensed volume over one profile window.
struct UnitEnergyProfile {
    std::int64_t tick_end = 0;  // last tick included
    std::uint64_t unit_id = 0;
    bool admits_noise = false;
    ProfileWindow window;
};

/// Shannon entropy in bits of the gain split over the four stream kinds plus
/// the emission bucket, so the range is [0, log2 5]. Empty for zero gain.
std::optional<double> specialization_entropy(const std::array<double, kBuckets>& gain);

/// True when the unit admits a noise channel and at least a quarter of its
/// windowed sensed volume came from the noise stream.
bool noise_dominated(const ProfileWindow& w, bool admits_noise);

/// Fraction of profiles that are noise dominated; 0 for an empty population.
double noise_fraction(std::span<const UnitEnergyProfile> profiles);

inline constexpr int kMaxTrophicLevel = 8;

struct TrophicAssignment {
    std::map<std::uint64_t, int> level;  // unit id -> level >= 1
    std::array<int, kMaxTrophicLevel + 1> histogram{};  // index = level, [0] unused
    // flow[a][b]: gain flowing from level a into units of level b; a = 0 is raw streams.
    std::array<std::array<double, kMaxTrophicLevel + 1>, kMaxTrophicLevel + 1> flow{};
};

/// Level 1 when more than half of a unit's windowed gain comes from raw streams;
/// otherwise one above the gain-weighted median level of the emitters feeding it.
/// Units that feed each other in a cycle share the lowest level in the cycle,
/// and their mutual gain counts like stream gain. Emitters absent from
/// `profiles` take their level from `previous` when present, else level 1.
TrophicAssignment assign_trophic_levels(std::span<const UnitEnergyProfile> profiles,
                                        const std::map<std::uint64_t, int>* previous = nullptr);

struct Divergence {
    double inter = 0.0;
    double intra = 0.0;
    std::size_t inter_pairs = 0;
    std::size_t intra_pairs = 0;
};

/// Mean genome distance across two final populations versus within them.
/// Pairs of distinct indices; exhaustive when a population pair has at most
/// `cap` ordered pairs, otherwise `cap` seeded draws. Populations need >= 2 genomes.
Divergence path_divergence(std::span<const Genome> a, std::span<const Genome> b, std::uint64_t seed,
                           std::size_t cap = 10000, const DistanceScale& scale = {});

/// Least-squares slope of y on x; 0 when x has no spread.
double ols_slope(std::span<const double> x, std::span<const double> y);

struct ComplexityPoint {
    std::int64_t tick = 0;
    double mean_nodes = 0.0;
    double mean_edges = 0.0;
};

struct ComplexitySeries {
    std::vector<ComplexityPoint> points;
    double node_slope = 0.0;  // per tick
    double edge_slope = 0.0;
};

ComplexitySeries complexity_series(std::span<const std::vector<Genome>> populations,
                                   std::span<const std::int64_t> ticks);
/// Same, from precomputed per-tick means.
ComplexitySeries complexity_series(std::vector<ComplexityPoint> points);

/// Per tick cost / improvement ratios (see TickReport efficiency fields).
std::vector<double> efficiency_series(std::span<const double> cost, std::span<const double> improvement);

struct MannKendall {
    std::size_t n = 0;
    double s = 0.0;
    double variance = 0.0;
    double z = 0.0;
    double p_value = 1.0;  // two-sided
    std::string trend = "none";  // "increasing", "decreasing" or "none" at the given alpha
};

/// Mann-Kendall trend test with the tie-corrected variance and continuity correction.
MannKendall mann_kendall(std::span<const double> series, double alpha = 0.05);

/// Means of consecutive blocks of `block` values; a trailing partial block is dropped.
std::vector<double> block_means(std::span<const double> series, std::size_t block);

}  // namespace mee
