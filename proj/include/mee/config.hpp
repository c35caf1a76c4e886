#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "mee/evolution.hpp"
#include "mee/physics.hpp"
#include "mee/streams.hpp"

namespace mee {

struct WorldConfig {
    int width = 32;
    int height = 32;
    int founder_count = 128;
    int r_s = 2;  // perception radius (Chebyshev)
    int r_a = 4;  // attenuation radius (Chebyshev)
    double move_prob = 0.1;
    std::uint64_t master_seed = 1;

    int founder_nodes = 8;
    int founder_steps = 2;
    double sigma_init = 0.05;
    double emission_gain = 1.0;
    int emission_channels = 4;  // D_e; also the number of signal channels sensed

    int profile_window = 500;   // W_m
    bool collect_ledger = false;
};

struct TelemetryConfig {
    int snapshot_every = 5000;
    int hash_every = 1;
    bool gzip = false;
    bool full_ledger = false;  // per-unit per-tick ledger rows in addition to window profiles
};

struct SimConfig {
    WorldConfig world;
    PhysicsParams physics;
    MutationRates rates;
    VariationLimits limits;
    StreamsConfig streams = StreamsConfig::defaults();
    TelemetryConfig telemetry;

    /// Sensory width W_s: stream channels followed by D_e signal channels.
    int sensory_width() const { return streams.channel_count() + world.emission_channels; }
    /// Throws ConfigError describing the first structural problem.
    void validate() const;
};

/// Reads the sectioned key = value format ([world], [physics], [rates],
/// [variation], [streams], [telemetry]). Unknown sections or keys are errors.
/// Relative corpus paths are resolved against the config file's directory
/// when the file exists there.
SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// Writes the same format back out (every key, current values).
std::string render_config(const SimConfig& cfg);

void to_json(nlohmann::json& j, const SimConfig& cfg);
void from_json(const nlohmann::json& j, SimConfig& cfg);

}  // namespace mee
