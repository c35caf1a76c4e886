#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mee/config.hpp"
#include "mee/genome.hpp"
#include "mee/world.hpp"

namespace mee::test {

/// The bundled corpus, loaded once.
const std::string& corpus();
std::string source_path(const std::string& rel);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Small world: no founders, uniform streams unless `weather` is set.
SimConfig micro_config(int size = 16, bool weather = false);

/// Genome with the world's layout and no connections, every receptor admitted.
Genome empty_genome(const SimConfig& cfg, int node_count = 5);

/// Founder genome for the given config, seeded independently of any world.
Genome founder_genome(const SimConfig& cfg, std::uint64_t seed);

/// Keeps only connections for which `keep(c)` holds.
template <class F>
Genome filter_edges(Genome g, F keep) {
    std::vector<Connection> out;
    for (const auto& c : g.connections)
        if (keep(c)) out.push_back(c);
    g.connections = std::move(out);
    return g;
}

/// A unit that passes its admitted inputs through one hidden node each, so
/// that every admitted channel with data keeps exactly one node active.
/// Admits the numeric and temporal streams only.
Genome pass_through_genome(const SimConfig& cfg);

}  // namespace mee::test
