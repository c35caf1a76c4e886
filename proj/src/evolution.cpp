#include "mee/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mee {

namespace {

bool is_readout(const Layout& L, int node) { return node >= L.prediction_begin() && node < L.hidden_begin(); }

std::size_t edges_into_readouts(const Genome& g) {
    return static_cast<std::size_t>(std::count_if(g.connections.begin(), g.connections.end(),
                                                  [&](const Connection& c) { return is_readout(g.layout, c.dst); }));
}

std::size_t possible_edges(const Genome& g) {
    // Edges may start anywhere but never end on a sensory injection node.
    const auto total = static_cast<std::size_t>(g.total_nodes());
    return total * (total - static_cast<std::size_t>(g.layout.sensory));
}

std::size_t edges_into_non_inputs(const Genome& g) {
    return static_cast<std::size_t>(std::count_if(g.connections.begin(), g.connections.end(),
                                                  [&](const Connection& c) { return c.dst >= g.layout.sensory; }));
}

Genome add_edge(Genome g, const VariationLimits& lim, Rng& rng) {
    const int total = g.total_nodes();
    const int S = g.layout.sensory;
    for (int attempt = 0; attempt < 64; ++attempt) {
        const int src = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
        const int dst = S + static_cast<int>(rng.below(static_cast<std::uint64_t>(total - S)));
        if (!g.find(src, dst)) {
            g.connections.push_back({src, dst, rng.normal(lim.new_edge_sigma)});
            g.sort_connections();
            return g;
        }
    }
    // Dense genome: enumerate the free slots and pick one.
    std::vector<std::pair<int, int>> free;
    for (int src = 0; src < total; ++src)
        for (int dst = S; dst < total; ++dst)
            if (!g.find(src, dst)) free.emplace_back(src, dst);
    if (free.empty()) return g;
    const auto [src, dst] = free[rng.below(free.size())];
    g.connections.push_back({src, dst, rng.normal(lim.new_edge_sigma)});
    g.sort_connections();
    return g;
}

}  // namespace

Genome mutate_weights(Genome g, const MutationRates& r, Rng& rng) {
    for (auto& c : g.connections)
        if (rng.bernoulli(r.weight_rate)) c.weight += rng.normal(r.weight_sigma);
    return g;
}

Genome split_edge(Genome g, std::size_t edge, const VariationLimits& lim) {
    if (edge >= g.connections.size() || g.node_count >= lim.bounds.node_max) return g;
    const Connection old = g.connections[edge];
    const int fresh = g.total_nodes();
    g.node_count += 1;
    g.connections.erase(g.connections.begin() + static_cast<std::ptrdiff_t>(edge));
    g.connections.push_back({old.src, fresh, 1.0});
    g.connections.push_back({fresh, old.dst, old.weight});
    g.sort_connections();
    return g;
}

Genome delete_edge(Genome g, std::size_t edge, const VariationLimits& lim) {
    if (edge >= g.connections.size()) return g;
    if (!lim.strict_blind_deletion && is_readout(g.layout, g.connections[edge].dst) && edges_into_readouts(g) == 1)
        return g;
    g.connections.erase(g.connections.begin() + static_cast<std::ptrdiff_t>(edge));
    return g;
}

Genome mutate_topology(Genome g, const MutationRates& r, const VariationLimits& lim, Rng& rng, TopologyOp* applied) {
    if (applied) *applied = TopologyOp::None;
    if (!rng.bernoulli(r.topo_rate)) return g;

    std::vector<TopologyOp> options;
    if (!g.connections.empty() && g.node_count < lim.bounds.node_max) options.push_back(TopologyOp::SplitEdge);
    if (edges_into_non_inputs(g) < possible_edges(g)) options.push_back(TopologyOp::AddEdge);
    if (!g.connections.empty()) options.push_back(TopologyOp::DeleteEdge);
    if (options.empty()) return g;

    const TopologyOp op = options[rng.below(options.size())];
    const std::size_t before_edges = g.connections.size();
    switch (op) {
        case TopologyOp::SplitEdge: g = split_edge(std::move(g), rng.below(g.connections.size()), lim); break;
        case TopologyOp::AddEdge: g = add_edge(std::move(g), lim, rng); break;
        case TopologyOp::DeleteEdge: {
            g = delete_edge(std::move(g), rng.below(g.connections.size()), lim);
            if (g.connections.size() == before_edges) return g;  // guarded no-op
            break;
        }
        case TopologyOp::None: break;
    }
    if (applied) *applied = op;
    return g;
}

void flip_receptor_bit(Genome& g, std::size_t bit, Rng& rng) {
    auto& mask = g.interface.receptor_mask;
    if (mask.empty()) return;
    bit %= mask.size();
    const auto set = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    if (mask[bit] && set == 1) {
        std::vector<std::size_t> unset;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (!mask[i]) unset.push_back(i);
        if (unset.empty()) return;
        mask[unset[rng.below(unset.size())]] = true;
        return;
    }
    mask[bit] = !mask[bit];
}

Genome mutate_params_and_interface(Genome g, const MutationRates& r, const VariationLimits& lim, Rng& rng) {
    auto step = [&rng] { return rng.bernoulli(0.5) ? 1 : -1; };

    if (rng.bernoulli(r.param_rate))
        g.params.propagation_steps = std::clamp(g.params.propagation_steps + step(), 1, lim.bounds.steps_cap);
    if (rng.bernoulli(r.param_rate))
        g.params.move_prob = std::clamp(g.params.move_prob + rng.normal(0.02), 0.0, 1.0);

    const double iface_rate = r.param_rate * r.interface_factor;
    if (rng.bernoulli(iface_rate)) flip_receptor_bit(g, rng.below(g.interface.receptor_mask.size()), rng);
    if (rng.bernoulli(iface_rate))
        g.interface.emission_width = std::clamp(g.interface.emission_width + step(), 1, g.layout.emission);
    if (rng.bernoulli(iface_rate)) g.interface.emission_gain *= std::exp(rng.normal(0.1));
    return g;
}

Genome recombine(const Genome& a, const Genome& b, const MutationRates& r, const VariationLimits& lim, Rng& rng) {
    Genome child;
    child.layout = a.layout;
    child.node_count = std::max(a.node_count, b.node_count);

    auto ia = a.connections.begin();
    auto ib = b.connections.begin();
    auto less = [](const Connection& x, const Connection& y) {
        return x.src != y.src ? x.src < y.src : x.dst < y.dst;
    };
    while (ia != a.connections.end() || ib != b.connections.end()) {
        if (ib == b.connections.end() || (ia != a.connections.end() && less(*ia, *ib))) {
            if (rng.bernoulli(0.5)) child.connections.push_back(*ia);
            ++ia;
        } else if (ia == a.connections.end() || less(*ib, *ia)) {
            if (rng.bernoulli(0.5)) child.connections.push_back(*ib);
            ++ib;
        } else {
            child.connections.push_back(rng.bernoulli(0.5) ? *ia : *ib);
            ++ia;
            ++ib;
        }
    }

    auto pick = [&rng](const auto& x, const auto& y) { return rng.bernoulli(0.5) ? x : y; };
    child.interface.emission_width = pick(a.interface.emission_width, b.interface.emission_width);
    child.interface.emission_gain = pick(a.interface.emission_gain, b.interface.emission_gain);
    child.interface.receptor_mask = pick(a.interface.receptor_mask, b.interface.receptor_mask);
    child.params.propagation_steps = pick(a.params.propagation_steps, b.params.propagation_steps);
    child.params.move_prob = pick(a.params.move_prob, b.params.move_prob);

    child = mutate_weights(std::move(child), r, rng);
    child = mutate_topology(std::move(child), r, lim, rng);
    return mutate_params_and_interface(std::move(child), r, lim, rng);
}

std::optional<Offspring> try_reproduce(const Unit& parent, const Neighborhood& nbh, const PhysicsParams& p,
                                       const MutationRates& r, const VariationLimits& lim, Rng& rng) {
    if (!(parent.energy > p.repro_threshold)) return std::nullopt;

    std::array<std::size_t, 8> order{0, 1, 2, 3, 4, 5, 6, 7};
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    std::optional<std::size_t> slot;
    for (auto i : order)
        if (nbh.occupant[i] == nullptr) {
            slot = i;
            break;
        }
    if (!slot) return std::nullopt;

    const Unit* partner = nullptr;
    for (const Unit* u : nbh.occupant)
        if (u && u->energy > p.repro_threshold && (!partner || u->id < partner->id)) partner = u;

    Offspring child;
    child.dy = kNeighborOffsets[*slot][0];
    child.dx = kNeighborOffsets[*slot][1];
    if (partner && rng.bernoulli(r.recomb_prob)) {
        child.genome = recombine(parent.genome, partner->genome, r, lim, rng);
        child.partner_id = partner->id;
    } else {
        child.genome = mutate_weights(parent.genome, r, rng);
        child.genome = mutate_topology(std::move(child.genome), r, lim, rng);
        child.genome = mutate_params_and_interface(std::move(child.genome), r, lim, rng);
    }
    child.child_energy = parent.energy / 2.0;
    child.parent_energy = parent.energy - child.child_energy;
    return child;
}

}  // namespace mee
