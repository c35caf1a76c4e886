#pragma once

#include <cstdint>
#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "mee/config.hpp"
#include "mee/metrics.hpp"
#include "mee/physics.hpp"
#include "mee/streams.hpp"
#include "mee/unit.hpp"

namespace mee {

/// Signal strength received at toroidal Chebyshev distance d >= 1:
/// amplitude / d^2 within r_a, zero beyond.
double attenuate(double amplitude, int d, int r_a);

/// Equal split of min(offered, v_max) among `claimants`; 0 when nobody claims.
double allocate_depletion(double offered, int claimants, double v_max);

/// Toroidal Chebyshev distance.
int torus_chebyshev(int x0, int y0, int x1, int y1, int width, int height);

/// An emission deposited during one tick, readable by neighbours on the next.
struct Deposit {
    int x = 0;
    int y = 0;
    std::uint64_t emitter = 0;
    std::vector<double> emission;

    bool operator==(const Deposit&) const = default;
};

struct Event {
    enum class Kind { Birth, Death };
    Kind kind = Kind::Birth;
    std::int64_t tick = 0;
    std::uint64_t unit_id = 0;
    std::uint64_t parent_a = 0;
    std::uint64_t parent_b = 0;
    std::uint64_t genome_hash = 0;
    double energy = 0.0;
    int x = 0;
    int y = 0;
    std::int64_t age = 0;
};

/// What a unit sensed in one tick. Exposed so tests can check locality.
struct Sensation {
    std::vector<double> values;           // W_s, zero where no data
    std::vector<std::uint8_t> carrying;   // 1 where the channel carried data
    std::array<double, kBuckets> volume{};
    std::vector<std::pair<std::uint64_t, double>> emitter_volume;
    int v_in = 0;
    double v_total = 0.0;
};

struct TickReport {
    std::int64_t tick = 0;
    std::size_t population = 0;
    int births = 0;
    int deaths = 0;
    int deferred = 0;
    int corrupt = 0;

    double energy_before = 0.0;   // sum over units alive at tick start
    double energy_after = 0.0;    // sum over units alive at tick end
    double gain = 0.0;
    double compute_cost = 0.0;
    double maintenance = 0.0;
    double removed_energy = 0.0;  // residual energy of units that died

    double mean_energy = 0.0;
    PerStream mean_error{};        // over units that received the stream
    std::array<int, 4> error_units{};
    double noise_fraction = 0.0;
    double mean_entropy = 0.0;     // over units with windowed gain > 0
    int entropy_units = 0;
    double efficiency_cost = 0.0;        // sum of compute + maintenance over units with stream data
    double efficiency_improvement = 0.0; // sum of max(baseline - error, eps)
    int efficiency_units = 0;
    double mean_nodes = 0.0;
    double mean_edges = 0.0;

    std::vector<Event> events;
    std::vector<EnergyLedgerEntry> ledger;  // filled when collect_ledger is on
    std::vector<UnitEnergyProfile> profiles;    // filled at profile-window boundaries
};

class World {
public:
    /// Places founders according to cfg.world. `baselines` feed the efficiency measurement.
    World(SimConfig cfg, std::string corpus, PerStream baselines = {});

    TickReport step();

    std::int64_t tick() const noexcept { return m_tick; }
    const SimConfig& config() const noexcept { return m_cfg; }
    const std::vector<Unit>& units() const noexcept { return m_units; }
    std::vector<Unit>& units_mut() noexcept { return m_units; }
    const std::vector<Deposit>& deposits() const noexcept { return m_deposits; }
    const StreamField& streams() const noexcept { return m_streams; }
    StreamField& streams_mut() noexcept { return m_streams; }
    const PerStream& baselines() const noexcept { return m_baselines; }
    std::uint64_t next_id() const noexcept { return m_next_id; }

    /// Removes every unit (and pending deposits).
    void clear_units();
    /// Inserts a unit at (x, y) with a zeroed network state. Throws if the cell is taken.
    Unit& add_unit(const Genome& g, int x, int y, double energy);
    const Unit* unit_at(int x, int y) const;
    const Unit* find(std::uint64_t id) const;

    /// Recomputes what unit `id` would sense this tick (after `advance`), without changing state.
    Sensation sense_preview(std::uint64_t id);

    /// 64-bit hash of the full dynamic state.
    std::uint64_t state_hash() const;

    nlohmann::json to_json() const;
    static World from_json(const nlohmann::json& j, std::string corpus);

    /// Kinds of the W_s sensory channels.
    const std::vector<ChannelKind>& channel_kinds() const noexcept { return m_kinds; }

private:
    void rebuild_occupancy();
    void compute_claimants();
    void build_deposit_index();
    void sense(const Unit& u, Sensation& out) const;
    std::size_t cell(int x, int y) const { return static_cast<std::size_t>(y * m_cfg.world.width + x); }
    int wrap_x(int x) const;
    int wrap_y(int y) const;

    SimConfig m_cfg;
    std::string m_corpus;
    PerStream m_baselines{};
    StreamField m_streams;
    std::int64_t m_tick = 0;
    std::uint64_t m_next_id = 1;

    std::vector<Unit> m_units;           // ascending id
    std::vector<int> m_occupancy;        // cell -> index into m_units, -1 when empty
    std::vector<Deposit> m_deposits;     // emitted last tick
    std::vector<std::vector<int>> m_deposit_index;  // cell -> deposit indices
    std::array<std::vector<int>, 4> m_claimants;     // per stream, per cell
    std::array<std::vector<double>, 4> m_cell_share; // per stream, per cell: volume per claimant
    std::vector<ChannelKind> m_kinds;
    std::vector<StreamKind> m_channel_stream;  // stream owning each stream channel
};

}  // namespace mee
