#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "mee/genome.hpp"
#include "mee/physics.hpp"
#include "mee/rng.hpp"
#include "mee/unit.hpp"

namespace mee {

struct MutationRates {
    double weight_rate = 0.01;       // per connection per reproduction
    double weight_sigma = 0.05;
    double topo_rate = 0.05;         // per reproduction
    double param_rate = 0.05;        // per reproduction
    double interface_factor = 0.01;  // multiplier on param_rate for boundary genes
    double recomb_prob = 0.25;
};

/// Structural limits the operators respect. Nothing here describes how well
/// a unit is doing; operators never see energy, error or stream data.
struct VariationLimits {
    GenomeBounds bounds;
    bool strict_blind_deletion = false;
    double new_edge_sigma = 0.1;
};

enum class TopologyOp { None, SplitEdge, AddEdge, DeleteEdge };

Genome mutate_weights(Genome g, const MutationRates& r, Rng& rng);

/// With probability topo_rate applies one applicable structural change.
/// `applied`, when given, receives the operation that actually changed the genome.
Genome mutate_topology(Genome g, const MutationRates& r, const VariationLimits& lim, Rng& rng,
                       TopologyOp* applied = nullptr);

/// Operator-level helpers, exposed for tests.
Genome split_edge(Genome g, std::size_t edge, const VariationLimits& lim);
/// Returns the genome unchanged when the deletion would leave no edge into any readout node
/// (unless strict_blind_deletion is set).
Genome delete_edge(Genome g, std::size_t edge, const VariationLimits& lim);

Genome mutate_params_and_interface(Genome g, const MutationRates& r, const VariationLimits& lim, Rng& rng);

/// Flip one receptor bit, redirecting to a random unset bit if the flip would
/// clear the last set bit.
void flip_receptor_bit(Genome& g, std::size_t bit, Rng& rng);

/// Key-aligned crossover, then all three mutation operators.
Genome recombine(const Genome& a, const Genome& b, const MutationRates& r, const VariationLimits& lim, Rng& rng);

/// Eight-neighborhood offsets (dy, dx) in lexicographic order.
inline constexpr std::array<std::array<int, 2>, 8> kNeighborOffsets{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

/// What a parent sees around itself: for each offset, the occupant (or null).
struct Neighborhood {
    std::array<const Unit*, 8> occupant{};
};

struct Offspring {
    int dy = 0;
    int dx = 0;
    Genome genome;
    double parent_energy = 0.0;
    double child_energy = 0.0;
    std::uint64_t partner_id = 0;  // 0 for asexual
};

/// Fission attempt. Returns nullopt (deferred) when no neighbor is empty or
/// the parent is not strictly above threshold.
std::optional<Offspring> try_reproduce(const Unit& parent, const Neighborhood& nbh, const PhysicsParams& p,
                                       const MutationRates& r, const VariationLimits& lim, Rng& rng);

}  // namespace mee
