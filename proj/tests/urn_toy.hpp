#pragma once

#include <cstdint>

#include "mee/physics.hpp"

namespace mee::test {

/// Two parallel pathways, input_k -> hidden_k -> both prediction readouts,
/// trained by the plastic rule on a noisy sine wave presented on two channels.
struct UrnToyParams {
    int ticks = 2000;
    int early_ticks = 20;
    double weight = 0.5;   // symmetric starting weight
    double jitter = 0.05;  // uniform +- jitter on every weight
    double noise = 0.05;   // per-channel Gaussian noise on the stream
    double period = 50.0;
    PhysicsParams physics = toy_physics();

    static PhysicsParams toy_physics();
};

struct UrnOutcome {
    double early_a = 0.0;  // sum over early ticks of surplus * pathway activation
    double early_b = 0.0;
    double mass_a = 0.0;   // sum of |w| over the pathway's edges at the end
    double mass_b = 0.0;

    bool early_winner_a() const { return early_a > early_b; }
    bool final_winner_a() const { return mass_a > mass_b; }
    bool locked_in() const { return early_winner_a() == final_winner_a() && early_a != early_b && mass_a != mass_b; }
};

UrnOutcome run_urn_toy(std::uint64_t seed, const UrnToyParams& p = {});

}  // namespace mee::test
