#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mee/rng.hpp"

namespace mee {

/// Boundary dimensions shared by every genome in a run.
///
/// Node index space is laid out as
///   [0, S)                 sensory injection nodes
///   [S, 2S)                prediction readout nodes
///   [2S, 2S + E)           emission readout nodes
///   [2S + E, total)        internal (hidden) nodes
/// Internal nodes are appended at the end so that splitting an edge never
/// renumbers existing nodes.
struct Layout {
    int sensory = 0;   // W_s
    int emission = 0;  // D_e

    int input_begin() const noexcept { return 0; }
    int prediction_begin() const noexcept { return sensory; }
    int emission_begin() const noexcept { return 2 * sensory; }
    int hidden_begin() const noexcept { return 2 * sensory + emission; }
    int boundary_nodes() const noexcept { return hidden_begin(); }

    bool operator==(const Layout&) const = default;
};

struct Connection {
    int src = 0;
    int dst = 0;
    double weight = 0.0;

    bool operator==(const Connection&) const = default;
};

struct InterfaceGenes {
    int emission_width = 1;
    double emission_gain = 1.0;
    std::vector<bool> receptor_mask;

    bool operator==(const InterfaceGenes&) const = default;
};

struct OperationalGenes {
    int propagation_steps = 1;
    double move_prob = 0.1;

    bool operator==(const OperationalGenes&) const = default;
};

/// Heritable specification of a unit. Connections are kept sorted by
/// (src, dst) and unique; that order is the canonical order used for
/// hashing, serialization and crossover alignment.
struct Genome {
    Layout layout;
    int node_count = 0;  // internal nodes only
    std::vector<Connection> connections;
    InterfaceGenes interface;
    OperationalGenes params;

    int total_nodes() const noexcept { return layout.boundary_nodes() + node_count; }
    std::size_t nonzero_connections() const noexcept;
    /// Position of (src, dst) in `connections`, if present.
    std::optional<std::size_t> find(int src, int dst) const;
    void sort_connections();

    bool operator==(const Genome&) const = default;
};

struct GenomeBounds {
    int node_min = 1;
    int node_max = 100;
    int steps_cap = 4;
};

/// Founder construction parameters.
struct FounderSpec {
    Layout layout;
    double sigma_init = 0.1;
    int propagation_steps = 2;
    double move_prob = 0.1;
    double emission_gain = 1.0;
};

/// Fully connected sensory -> internal -> readout scaffold with a self-loop on
/// every internal node. Throws ConfigError if node_count is outside [5, 50].
Genome new_uniform_genome(int node_count, const FounderSpec& spec, Rng& rng);

struct DistanceScale {
    double w_scale = 1.0;
    int node_max = 100;
};

/// Jaccard distance on edge keys + mean |dw| / w_scale over shared edges
/// + |d node_count| / node_max.
double genome_distance(const Genome& a, const Genome& b, const DistanceScale& scale = {});

/// Empty string when every invariant holds, otherwise a description of the first violation.
std::string validate_genome(const Genome& g, const GenomeBounds& bounds);

/// Stable 64-bit digest of the canonical content.
std::uint64_t genome_hash(const Genome& g);

void to_json(nlohmann::json& j, const Genome& g);
void from_json(const nlohmann::json& j, Genome& g);

}  // namespace mee
