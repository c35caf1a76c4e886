#include "support.hpp"

#include "mee/streams.hpp"

namespace mee::test {

std::string source_path(const std::string& rel) { return std::string(MEE_SOURCE_DIR) + "/" + rel; }

const std::string& corpus() {
    static const std::string text = load_corpus(source_path("data/corpus.txt"));
    return text;
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("mee_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

SimConfig micro_config(int size, bool weather) {
    SimConfig cfg;
    cfg.world.width = size;
    cfg.world.height = size;
    cfg.world.founder_count = 0;
    cfg.streams.corpus_path = source_path("data/corpus.txt");
    if (!weather)
        for (auto& s : cfg.streams.streams) s.blobs.count = 0;
    return cfg;
}

Genome empty_genome(const SimConfig& cfg, int node_count) {
    Genome g;
    g.layout = Layout{cfg.sensory_width(), cfg.world.emission_channels};
    g.node_count = node_count;
    g.interface.emission_width = cfg.world.emission_channels;
    g.interface.emission_gain = 1.0;
    g.interface.receptor_mask.assign(static_cast<std::size_t>(cfg.sensory_width()), true);
    g.params.propagation_steps = 1;
    g.params.move_prob = 0.0;
    return g;
}

Genome founder_genome(const SimConfig& cfg, std::uint64_t seed) {
    FounderSpec spec;
    spec.layout = Layout{cfg.sensory_width(), cfg.world.emission_channels};
    spec.sigma_init = cfg.world.sigma_init;
    spec.propagation_steps = cfg.world.founder_steps;
    spec.move_prob = 0.0;
    spec.emission_gain = cfg.world.emission_gain;
    Rng rng(seed);
    return new_uniform_genome(cfg.world.founder_nodes, spec, rng);
}

Genome pass_through_genome(const SimConfig& cfg) {
    std::vector<int> channels;
    for (auto kind : {StreamKind::Numeric, StreamKind::Temporal}) {
        const auto& s = cfg.streams.get(kind);
        for (int c = s.first; c < s.last(); ++c) channels.push_back(c);
    }
    Genome g = empty_genome(cfg, static_cast<int>(channels.size()));
    g.interface.receptor_mask.assign(g.interface.receptor_mask.size(), false);
    g.params.propagation_steps = 3;
    const Layout& L = g.layout;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const int c = channels[i];
        const int h = L.hidden_begin() + static_cast<int>(i);
        g.interface.receptor_mask[static_cast<std::size_t>(c)] = true;
        g.connections.push_back({c, h, 1.0});
        g.connections.push_back({h, L.prediction_begin() + c, 1.0});
    }
    g.sort_connections();
    return g;
}

}  // namespace mee::test
