#include "mee/neural.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace mee {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double readout(double z, ChannelKind kind, double eps_p) {
    const double p = logistic(z);
    return kind == ChannelKind::Discrete ? std::clamp(p, eps_p, 1.0 - eps_p) : p;
}

}  // namespace

NetState zero_state(const Genome& g) {
    NetState s;
    s.activations.assign(static_cast<std::size_t>(g.total_nodes()), 0.0);
    s.last_prediction.assign(static_cast<std::size_t>(g.layout.sensory), 0.5);
    return s;
}

void forward_cycle_inplace(const Genome& g, NetState& state, std::span<const double> sensory,
                           const CycleSettings& settings, CycleOutput& out, std::vector<double>& z) {
    const Layout& L = g.layout;
    const auto S = static_cast<std::size_t>(L.sensory);
    const auto total = static_cast<std::size_t>(g.total_nodes());
    assert(sensory.size() == S);
    assert(settings.kinds.size() == S);

    auto& a = state.activations;
    a.resize(total, 0.0);
    const auto& mask = g.interface.receptor_mask;

    const int steps = g.params.propagation_steps;
    for (int step = 0; step < steps; ++step) {
        z.assign(total, 0.0);
        for (const auto& c : g.connections) z[static_cast<std::size_t>(c.dst)] += c.weight * a[static_cast<std::size_t>(c.src)];
        for (std::size_t i = 0; i < S; ++i)
            if (mask[i]) z[i] += sensory[i];
        for (std::size_t j = 0; j < total; ++j) a[j] = z[j] > 0.0 ? z[j] : 0.0;
    }

    bool finite = true;
    for (std::size_t j = 0; j < total && finite; ++j) finite = std::isfinite(z[j]);

    out.corrupt = !finite;
    out.k_cost = static_cast<double>(g.nonzero_connections()) * static_cast<double>(steps);
    out.prediction_next.resize(S);
    out.emission.assign(static_cast<std::size_t>(L.emission), 0.0);

    if (!finite) {
        std::fill(a.begin(), a.end(), 0.0);
        for (std::size_t c = 0; c < S; ++c) out.prediction_next[c] = readout(0.0, settings.kinds[c], settings.eps_p);
        out.v_repr = 0;
        state.last_prediction = out.prediction_next;
        return;
    }

    for (std::size_t c = 0; c < S; ++c)
        out.prediction_next[c] = readout(z[S + c], settings.kinds[c], settings.eps_p);

    const auto e0 = static_cast<std::size_t>(L.emission_begin());
    const auto width = static_cast<std::size_t>(g.interface.emission_width);
    for (std::size_t e = 0; e < width && e < out.emission.size(); ++e)
        out.emission[e] = g.interface.emission_gain * a[e0 + e];

    int active = 0;
    for (std::size_t j = static_cast<std::size_t>(L.hidden_begin()); j < total; ++j)
        if (a[j] > settings.tau) ++active;
    out.v_repr = active;
    state.last_prediction = out.prediction_next;
}

std::pair<NetState, CycleOutput> forward_cycle(const Genome& g, const NetState& state,
                                               std::span<const double> sensory, const CycleSettings& settings) {
    NetState next = state;
    CycleOutput out;
    std::vector<double> scratch;
    forward_cycle_inplace(g, next, sensory, settings, out, scratch);
    return {std::move(next), std::move(out)};
}

}  // namespace mee
