#include "mee/genome.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mee/errors.hpp"
#include "mee/hash.hpp"

namespace mee {

namespace {

bool key_less(const Connection& a, const Connection& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
}

}  // namespace

std::size_t Genome::nonzero_connections() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(connections.begin(), connections.end(), [](const Connection& c) { return c.weight != 0.0; }));
}

std::optional<std::size_t> Genome::find(int src, int dst) const {
    Connection probe{src, dst, 0.0};
    auto it = std::lower_bound(connections.begin(), connections.end(), probe, key_less);
    if (it != connections.end() && it->src == src && it->dst == dst)
        return static_cast<std::size_t>(it - connections.begin());
    return std::nullopt;
}

void Genome::sort_connections() { std::sort(connections.begin(), connections.end(), key_less); }

Genome new_uniform_genome(int node_count, const FounderSpec& spec, Rng& rng) {
    if (node_count < 5 || node_count > 50)
        throw ConfigError("founder node_count " + std::to_string(node_count) + " outside [5, 50]");
    if (spec.layout.sensory < 1 || spec.layout.emission < 1)
        throw ConfigError("layout needs at least one sensory and one emission channel");

    Genome g;
    g.layout = spec.layout;
    g.node_count = node_count;
    const Layout& L = g.layout;
    const int hidden0 = L.hidden_begin();
    const int readout_end = L.hidden_begin();

    g.connections.reserve(static_cast<std::size_t>(L.sensory * node_count + node_count * (readout_end - L.sensory) +
                                                   node_count));
    for (int i = 0; i < L.sensory; ++i)
        for (int h = 0; h < node_count; ++h) g.connections.push_back({i, hidden0 + h, rng.normal(spec.sigma_init)});
    for (int h = 0; h < node_count; ++h) {
        for (int r = L.prediction_begin(); r < readout_end; ++r)
            g.connections.push_back({hidden0 + h, r, rng.normal(spec.sigma_init)});
        g.connections.push_back({hidden0 + h, hidden0 + h, rng.normal(spec.sigma_init)});
    }
    g.sort_connections();

    g.interface.emission_width = L.emission;
    g.interface.emission_gain = spec.emission_gain;
    g.interface.receptor_mask.assign(static_cast<std::size_t>(L.sensory), true);
    g.params.propagation_steps = spec.propagation_steps;
    g.params.move_prob = spec.move_prob;
    return g;
}

double genome_distance(const Genome& a, const Genome& b, const DistanceScale& scale) {
    // Both edge lists are sorted by key, so one merge pass finds the shared set.
    std::size_t shared = 0;
    double dw = 0.0;
    auto ia = a.connections.begin();
    auto ib = b.connections.begin();
    while (ia != a.connections.end() && ib != b.connections.end()) {
        if (key_less(*ia, *ib)) {
            ++ia;
        } else if (key_less(*ib, *ia)) {
            ++ib;
        } else {
            ++shared;
            dw += std::abs(ia->weight - ib->weight);
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = a.connections.size() + b.connections.size() - shared;
    const double jaccard = uni == 0 ? 0.0 : 1.0 - static_cast<double>(shared) / static_cast<double>(uni);
    const double weight_term = shared == 0 ? 0.0 : dw / static_cast<double>(shared) / scale.w_scale;
    const double node_term =
        static_cast<double>(std::abs(a.node_count - b.node_count)) / static_cast<double>(scale.node_max);
    return jaccard + weight_term + node_term;
}

std::string validate_genome(const Genome& g, const GenomeBounds& bounds) {
    std::ostringstream err;
    if (g.node_count < bounds.node_min || g.node_count > bounds.node_max) {
        err << "node_count " << g.node_count << " outside [" << bounds.node_min << ", " << bounds.node_max << "]";
        return err.str();
    }
    const int total = g.total_nodes();
    for (std::size_t i = 0; i < g.connections.size(); ++i) {
        const auto& c = g.connections[i];
        if (c.src < 0 || c.dst < 0 || c.src >= total || c.dst >= total) {
            err << "connection " << c.src << "->" << c.dst << " references a node >= " << total;
            return err.str();
        }
        if (i > 0 && !key_less(g.connections[i - 1], c)) {
            err << "connections not strictly sorted at " << c.src << "->" << c.dst << " (duplicate or unordered)";
            return err.str();
        }
        if (!std::isfinite(c.weight)) {
            err << "non-finite weight on " << c.src << "->" << c.dst;
            return err.str();
        }
    }
    const auto& iface = g.interface;
    if (iface.emission_width < 1 || iface.emission_width > g.layout.emission) {
        err << "emission_width " << iface.emission_width << " outside [1, " << g.layout.emission << "]";
        return err.str();
    }
    if (!(iface.emission_gain > 0.0)) return "emission_gain must be > 0";
    if (static_cast<int>(iface.receptor_mask.size()) != g.layout.sensory) return "receptor_mask length != W_s";
    if (std::none_of(iface.receptor_mask.begin(), iface.receptor_mask.end(), [](bool b) { return b; }))
        return "receptor_mask has no bit set";
    if (g.params.propagation_steps < 1 || g.params.propagation_steps > bounds.steps_cap) {
        err << "propagation_steps " << g.params.propagation_steps << " outside [1, " << bounds.steps_cap << "]";
        return err.str();
    }
    if (!(g.params.move_prob >= 0.0 && g.params.move_prob <= 1.0)) return "move_prob outside [0, 1]";
    return {};
}

std::uint64_t genome_hash(const Genome& g) {
    StateHasher h;
    h.add(g.layout.sensory);
    h.add(g.layout.emission);
    h.add(g.node_count);
    h.add(static_cast<std::uint64_t>(g.connections.size()));
    for (const auto& c : g.connections) {
        h.add(c.src);
        h.add(c.dst);
        h.add(c.weight);
    }
    h.add(g.interface.emission_width);
    h.add(g.interface.emission_gain);
    for (bool b : g.interface.receptor_mask) h.add(b);
    h.add(g.params.propagation_steps);
    h.add(g.params.move_prob);
    return h.digest();
}

void to_json(nlohmann::json& j, const Genome& g) {
    auto edges = nlohmann::json::array();
    for (const auto& c : g.connections) edges.push_back(nlohmann::json::array({c.src, c.dst, c.weight}));
    std::string mask;
    mask.reserve(g.interface.receptor_mask.size());
    for (bool b : g.interface.receptor_mask) mask.push_back(b ? '1' : '0');
    j = nlohmann::json{
        {"layout", {{"sensory", g.layout.sensory}, {"emission", g.layout.emission}}},
        {"node_count", g.node_count},
        {"connections", std::move(edges)},
        {"interface",
         {{"emission_width", g.interface.emission_width},
          {"emission_gain", g.interface.emission_gain},
          {"receptor_mask", mask}}},
        {"params", {{"propagation_steps", g.params.propagation_steps}, {"move_prob", g.params.move_prob}}},
    };
}

void from_json(const nlohmann::json& j, Genome& g) {
    g.layout.sensory = j.at("layout").at("sensory").get<int>();
    g.layout.emission = j.at("layout").at("emission").get<int>();
    g.node_count = j.at("node_count").get<int>();
    g.connections.clear();
    for (const auto& e : j.at("connections"))
        g.connections.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    const auto& iface = j.at("interface");
    g.interface.emission_width = iface.at("emission_width").get<int>();
    g.interface.emission_gain = iface.at("emission_gain").get<double>();
    const auto mask = iface.at("receptor_mask").get<std::string>();
    g.interface.receptor_mask.assign(mask.size(), false);
    for (std::size_t i = 0; i < mask.size(); ++i) g.interface.receptor_mask[i] = mask[i] == '1';
    g.params.propagation_steps = j.at("params").at("propagation_steps").get<int>();
    g.params.move_prob = j.at("params").at("move_prob").get<double>();
}

}  // namespace mee
