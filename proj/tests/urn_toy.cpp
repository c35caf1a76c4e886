#include "urn_toy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "mee/genome.hpp"
#include "mee/neural.hpp"
#include "mee/plasticity.hpp"
#include "mee/rng.hpp"

namespace mee::test {

PhysicsParams UrnToyParams::toy_physics() {
    PhysicsParams p;
    p.alpha = 0.5;
    p.beta = 0.075;  // with 12 edge-steps, surplus turns negative once error passes ~0.1
    p.gamma = 1.0;
    p.eta = 0.05;
    p.lambda_decay = 1e-4;
    return p;
}

UrnOutcome run_urn_toy(std::uint64_t seed, const UrnToyParams& p) {
    Rng rng(seed);
    Genome g;
    g.layout = Layout{2, 1};
    g.node_count = 2;
    g.interface.emission_width = 1;
    g.interface.receptor_mask = {true, true};
    g.params.propagation_steps = 2;
    const int A = g.layout.hidden_begin();
    const int B = A + 1;
    const int p0 = g.layout.prediction_begin();
    auto w = [&] { return p.weight + p.jitter * (2.0 * rng.uniform() - 1.0); };
    g.connections = {{0, A, w()}, {A, p0, w()}, {A, p0 + 1, w()}, {1, B, w()}, {B, p0, w()}, {B, p0 + 1, w()}};
    g.sort_connections();

    const std::array<ChannelKind, 2> kinds{ChannelKind::Continuous, ChannelKind::Continuous};
    CycleSettings settings;
    settings.tau = p.physics.tau;
    settings.eps_p = p.physics.eps_p;
    settings.kinds = kinds;

    NetState state = zero_state(g);
    CycleOutput out;
    std::vector<double> scratch;
    std::array<double, 2> x{};
    int last_v_repr = 0;
    double last_k = 0.0;
    UrnOutcome r;

    for (int t = 0; t < p.ticks; ++t) {
        const double base = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * t / p.period);
        for (double& v : x) v = std::clamp(base + rng.normal(p.noise), 0.0, 1.0);

        const double err = prediction_error(x, state.last_prediction, kinds);
        const double c = compression_ratio(2, last_v_repr, err);
        const EnergyStep e = energy_update(0.0, c, 2.0, last_k, p.physics);

        if (t < p.early_ticks) {
            r.early_a += e.surplus * state.activations[static_cast<std::size_t>(A)];
            r.early_b += e.surplus * state.activations[static_cast<std::size_t>(B)];
        }
        hebbian_update_inplace(g, state, e.surplus, p.physics);
        forward_cycle_inplace(g, state, x, settings, out, scratch);
        last_v_repr = out.v_repr;
        last_k = out.k_cost;
    }

    for (const auto& c : g.connections) {
        if (c.src == A || c.dst == A) r.mass_a += std::abs(c.weight);
        if (c.src == B || c.dst == B) r.mass_b += std::abs(c.weight);
    }
    return r;
}

}  // namespace mee::test
