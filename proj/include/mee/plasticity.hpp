#pragma once

#include "mee/genome.hpp"
#include "mee/neural.hpp"
#include "mee/physics.hpp"

namespace mee {

struct HebbianResult {
    Genome genome;
    int reset_weights = 0;  // non-finite updates that were reset to zero
};

/// Three-factor update on every connection j -> i:
///   w' = w + eta * surplus * x_j * y_i - lambda * w
/// with x_j, y_i the final activations of the cycle that earned `surplus`.
/// Results are clamped to [-w_cap, w_cap].
HebbianResult hebbian_update(const Genome& genome, const NetState& state, double surplus, const PhysicsParams& p);

/// In-place form; returns the number of reset weights.
int hebbian_update_inplace(Genome& genome, const NetState& state, double surplus, const PhysicsParams& p);

}  // namespace mee
