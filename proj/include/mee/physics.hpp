#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mee/channel.hpp"

namespace mee {

struct PhysicsParams {
    double alpha = 0.025;        // energy gain coefficient
    double beta = 0.0002;        // computation cost coefficient
    double gamma = 1.0;          // maintenance per tick
    double tau = 0.05;           // activity threshold, fixed
    double eta = 0.0005;         // Hebbian learning rate
    double lambda_decay = 1e-4;  // weight decay
    double e_start = 100.0;      // founder energy
    double repro_threshold = 200.0;
    double v_max = 64.0;         // per-cell data volume cap per tick
    double w_cap = 10.0;         // Hebbian weight clamp
    double eps_p = 1e-3;         // discrete prediction clamp
};

/// Where a piece of sensed volume (and therefore gain) came from: one of the
/// raw streams, or another unit's emission.
struct SourceTag {
    bool is_stream = true;
    StreamKind stream = StreamKind::Numeric;
    std::uint64_t emitter = 0;

    static SourceTag of(StreamKind k) { return {true, k, 0}; }
    static SourceTag of_emitter(std::uint64_t id) { return {false, StreamKind::Numeric, id}; }
    std::string label() const;

    bool operator==(const SourceTag&) const = default;
};

struct SourceShare {
    SourceTag source;
    double share = 0.0;
};

struct EnergyLedgerEntry {
    std::int64_t tick = 0;
    std::uint64_t unit_id = 0;
    double energy_before = 0.0;
    double energy_after = 0.0;
    double gain = 0.0;
    double compute_cost = 0.0;
    double maintenance = 0.0;
    std::vector<SourceShare> sources;  // shares sum to 1 when gain > 0, empty otherwise
};

/// Mean over scored channels of squared error (continuous) or binary
/// cross-entropy (discrete). Returns 0 when nothing is scored.
/// All spans must have equal length.
double prediction_error(std::span<const double> actual, std::span<const double> predicted,
                        std::span<const ChannelKind> kinds, std::span<const std::uint8_t> scored);

/// Overload that scores every channel.
double prediction_error(std::span<const double> actual, std::span<const double> predicted,
                        std::span<const ChannelKind> kinds);

/// C = (v_in / v_repr) * exp(-error); zero for a dormant network or no data.
double compression_ratio(int v_in, int v_repr, double error);

struct EnergyStep {
    double e_next = 0.0;
    double surplus = 0.0;  // gain - compute cost, maintenance excluded
    double gain = 0.0;
    double compute_cost = 0.0;
    double maintenance = 0.0;
};

/// e_next = e + alpha*c*v - beta*k - gamma.
EnergyStep energy_update(double e, double c, double v, double k, const PhysicsParams& p);

struct GuardReport {
    bool ok = true;
    double worst_margin = 0.0;        // min over checks of gamma - alpha*V_in*exp(-baseline)
    std::vector<std::string> lines;   // one "GUARD-FAIL ..." line per failed inequality
};

/// Checks alpha * w_s * exp(-baseline_k) < gamma for every stream kind, and
/// repro_threshold > e_start.
GuardReport validate_params(const PhysicsParams& p, int w_s, const PerStream& baselines);

}  // namespace mee
