#include "mee/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "mee/errors.hpp"
#include "mee/evolution.hpp"
#include "mee/hash.hpp"
#include "mee/neural.hpp"
#include "mee/plasticity.hpp"
#include "mee/rng.hpp"

namespace mee {

namespace {

constexpr double kEffEps = 1e-6;
constexpr int kSnapshotVersion = 1;

int thread_count(std::size_t work) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MEE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) n = v;
    }
    n = std::max(1, n);
    // Threads are not worth starting for small populations.
    if (work < 256) n = 1;
    return std::min<int>(n, static_cast<int>(std::max<std::size_t>(work, 1)));
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
    const int threads = thread_count(n);
    if (threads <= 1) {
        body(std::size_t{0}, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, t] { body(lo, hi, t); });
    }
    for (auto& th : pool) th.join();
}

int wrap(int v, int n) {
    v %= n;
    return v < 0 ? v + n : v;
}

FounderSpec founder_spec(const SimConfig& cfg) {
    FounderSpec spec;
    spec.layout = Layout{cfg.sensory_width(), cfg.world.emission_channels};
    spec.sigma_init = cfg.world.sigma_init;
    spec.propagation_steps = cfg.world.founder_steps;
    spec.move_prob = cfg.world.move_prob;
    spec.emission_gain = cfg.world.emission_gain;
    return spec;
}

// Everything one unit produces during the parallel phases of a tick.
struct UnitWork {
    EnergyStep step;
    double error = 0.0;
    PerStream kind_error{};
    std::array<bool, 4> kind_scored{};
    bool has_stream_data = false;
    double baseline = 0.0;
    double stream_error = 0.0;
    int resets = 0;
    std::array<double, kBuckets> volume{};
    double v_total = 0.0;
    std::vector<std::pair<std::uint64_t, double>> emitter_volume;
    std::vector<double> emission;
    bool emits = false;
};

}  // namespace

double attenuate(double amplitude, int d, int r_a) {
    if (d < 1 || d > r_a) return 0.0;
    return amplitude / (static_cast<double>(d) * static_cast<double>(d));
}

double allocate_depletion(double offered, int claimants, double v_max) {
    if (claimants <= 0 || offered <= 0.0) return 0.0;
    return std::min(offered, v_max) / static_cast<double>(claimants);
}

int torus_chebyshev(int x0, int y0, int x1, int y1, int width, int height) {
    int dx = std::abs(x0 - x1) % width;
    int dy = std::abs(y0 - y1) % height;
    dx = std::min(dx, width - dx);
    dy = std::min(dy, height - dy);
    return std::max(dx, dy);
}

World::World(SimConfig cfg, std::string corpus, PerStream baselines)
    : m_cfg(std::move(cfg)),
      m_corpus(std::move(corpus)),
      m_baselines(baselines),
      m_streams(m_cfg.streams, m_cfg.world.width, m_cfg.world.height, m_cfg.world.master_seed, m_corpus) {
    m_cfg.validate();
    const int W = m_cfg.world.width;
    const int H = m_cfg.world.height;
    const auto cells = static_cast<std::size_t>(W * H);
    m_occupancy.assign(cells, -1);
    m_deposit_index.assign(cells, {});
    for (auto& c : m_claimants) c.assign(cells, 0);
    for (auto& s : m_cell_share) s.assign(cells, 0.0);

    const int S = m_cfg.sensory_width();
    m_kinds.assign(static_cast<std::size_t>(S), ChannelKind::Continuous);
    m_channel_stream.assign(static_cast<std::size_t>(m_cfg.streams.channel_count()), StreamKind::Numeric);
    for (const auto& s : m_cfg.streams.streams)
        for (int c = s.first; c < s.last(); ++c) {
            m_kinds[static_cast<std::size_t>(c)] = channel_kind_of(s.kind);
            m_channel_stream[static_cast<std::size_t>(c)] = s.kind;
        }

    m_units.reserve(cells);

    // Founders on distinct cells: a partial Fisher-Yates over cell indices.
    std::vector<int> order(cells);
    for (std::size_t i = 0; i < cells; ++i) order[i] = static_cast<int>(i);
    Rng place = stream_for(m_cfg.world.master_seed, 0, 0, Phase::Founding);
    const auto n = static_cast<std::size_t>(m_cfg.world.founder_count);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(place.below(cells - i));
        std::swap(order[i], order[j]);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));

    const FounderSpec spec = founder_spec(m_cfg);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t id = m_next_id;
        Rng rng = stream_for(m_cfg.world.master_seed, id, 0, Phase::Founding);
        Genome g = new_uniform_genome(m_cfg.world.founder_nodes, spec, rng);
        add_unit(g, order[i] % W, order[i] / W, m_cfg.physics.e_start);
    }
}

void World::clear_units() {
    m_units.clear();
    m_deposits.clear();
    rebuild_occupancy();
}

Unit& World::add_unit(const Genome& g, int x, int y, double energy) {
    x = wrap_x(x);
    y = wrap_y(y);
    if (m_occupancy[cell(x, y)] >= 0) throw std::logic_error("cell already occupied");
    if (g.layout != Layout{m_cfg.sensory_width(), m_cfg.world.emission_channels})
        throw ConfigError("genome layout does not match the world's sensory/emission widths");
    Unit u;
    u.id = m_next_id++;
    u.x = x;
    u.y = y;
    u.energy = energy;
    u.genome = g;
    u.phenotype = g;
    u.state = zero_state(g);
    u.birth_tick = m_tick;
    u.window.start_tick = m_tick;
    m_units.push_back(std::move(u));
    m_occupancy[cell(x, y)] = static_cast<int>(m_units.size() - 1);
    return m_units.back();
}

const Unit* World::unit_at(int x, int y) const {
    const int idx = m_occupancy[cell(wrap_x(x), wrap_y(y))];
    return idx < 0 ? nullptr : &m_units[static_cast<std::size_t>(idx)];
}

const Unit* World::find(std::uint64_t id) const {
    auto it = std::lower_bound(m_units.begin(), m_units.end(), id,
                               [](const Unit& u, std::uint64_t v) { return u.id < v; });
    return (it != m_units.end() && it->id == id) ? &*it : nullptr;
}

int World::wrap_x(int x) const { return wrap(x, m_cfg.world.width); }
int World::wrap_y(int y) const { return wrap(y, m_cfg.world.height); }

void World::rebuild_occupancy() {
    std::fill(m_occupancy.begin(), m_occupancy.end(), -1);
    for (std::size_t i = 0; i < m_units.size(); ++i) m_occupancy[cell(m_units[i].x, m_units[i].y)] = static_cast<int>(i);
}

void World::compute_claimants() {
    const int r = m_cfg.world.r_s;
    const int W = m_cfg.world.width;
    const int H = m_cfg.world.height;
    for (auto& c : m_claimants) std::fill(c.begin(), c.end(), 0);

    for (const auto& u : m_units) {
        for (const auto& s : m_cfg.streams.streams) {
            bool admits = false;
            for (int c = s.first; c < s.last() && !admits; ++c) admits = u.phenotype.interface.receptor_mask[static_cast<std::size_t>(c)];
            if (!admits) continue;
            auto& claim = m_claimants[index_of(s.kind)];
            // Disks wider than the torus would visit a cell twice.
            const int ry = std::min(r, (H - 1) / 2);
            const int rx = std::min(r, (W - 1) / 2);
            for (int dy = -ry; dy <= ry; ++dy)
                for (int dx = -rx; dx <= rx; ++dx) ++claim[cell(wrap_x(u.x + dx), wrap_y(u.y + dy))];
        }
    }

    for (const auto& s : m_cfg.streams.streams) {
        const auto k = index_of(s.kind);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const double level = m_streams.intensity(s.kind, x, y);
                const double offered = level < m_cfg.streams.intensity_floor ? 0.0 : level * s.width;
                m_cell_share[k][cell(x, y)] = allocate_depletion(offered, m_claimants[k][cell(x, y)], m_cfg.physics.v_max);
            }
    }
}

void World::build_deposit_index() {
    for (auto& v : m_deposit_index) v.clear();
    for (std::size_t i = 0; i < m_deposits.size(); ++i)
        m_deposit_index[cell(m_deposits[i].x, m_deposits[i].y)].push_back(static_cast<int>(i));
}

void World::sense(const Unit& u, Sensation& out) const {
    const int S = m_cfg.sensory_width();
    const auto& mask = u.phenotype.interface.receptor_mask;
    out.values.assign(static_cast<std::size_t>(S), 0.0);
    out.carrying.assign(static_cast<std::size_t>(S), 0);
    out.volume.fill(0.0);
    out.emitter_volume.clear();
    out.v_in = 0;
    out.v_total = 0.0;

    const int W = m_cfg.world.width;
    const int H = m_cfg.world.height;
    const int rs = m_cfg.world.r_s;
    const int ry = std::min(rs, (H - 1) / 2);
    const int rx = std::min(rs, (W - 1) / 2);
    const double disk = static_cast<double>((2 * rx + 1) * (2 * ry + 1));

    thread_local std::vector<double> buf;
    for (const auto& s : m_cfg.streams.streams) {
        int admitted = 0;
        for (int c = s.first; c < s.last(); ++c) admitted += mask[static_cast<std::size_t>(c)] ? 1 : 0;
        if (admitted == 0) continue;
        const auto k = index_of(s.kind);

        double best = -1.0;
        int bx = u.x;
        int by = u.y;
        double share_sum = 0.0;
        for (int dy = -ry; dy <= ry; ++dy)
            for (int dx = -rx; dx <= rx; ++dx) {
                const int cx = wrap_x(u.x + dx);
                const int cy = wrap_y(u.y + dy);
                const double level = m_streams.intensity(s.kind, cx, cy);
                if (level > best) {
                    best = level;
                    bx = cx;
                    by = cy;
                }
                share_sum += m_cell_share[k][cell(cx, cy)];
            }
        if (best < m_cfg.streams.intensity_floor) continue;

        buf.resize(static_cast<std::size_t>(s.width));
        if (!m_streams.window_into(s.kind, bx, by, buf)) continue;
        for (int c = s.first; c < s.last(); ++c) {
            const auto ci = static_cast<std::size_t>(c);
            if (!mask[ci]) continue;
            out.values[ci] = buf[static_cast<std::size_t>(c - s.first)];
            out.carrying[ci] = 1;
            ++out.v_in;
        }
        out.volume[k] = static_cast<double>(admitted) / static_cast<double>(s.width) * share_sum / disk;
    }

    // Signals deposited on the previous tick. The receiver's own cell and its
    // own emissions are never read.
    const int first_signal = m_cfg.streams.channel_count();
    const int D = m_cfg.world.emission_channels;
    const int ra = m_cfg.world.r_a;
    const int ay = std::min(ra, (H - 1) / 2);
    const int ax = std::min(ra, (W - 1) / 2);
    bool any_signal = false;
    for (int ch = 0; ch < D; ++ch) any_signal = any_signal || mask[static_cast<std::size_t>(first_signal + ch)];
    if (!any_signal || m_deposits.empty()) {
        for (double v : out.volume) out.v_total += v;
        return;
    }

    struct Contribution {
        std::uint64_t emitter;
        int channel;
        double amount;
    };
    thread_local std::vector<Contribution> contribs;
    contribs.clear();
    thread_local std::vector<double> raw;
    raw.assign(static_cast<std::size_t>(D), 0.0);
    for (int dy = -ay; dy <= ay; ++dy)
        for (int dx = -ax; dx <= ax; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int cx = wrap_x(u.x + dx);
            const int cy = wrap_y(u.y + dy);
            const int d = std::max(std::abs(dx), std::abs(dy));
            for (int di : m_deposit_index[cell(cx, cy)]) {
                const Deposit& dep = m_deposits[static_cast<std::size_t>(di)];
                if (dep.emitter == u.id) continue;
                for (int ch = 0; ch < D; ++ch) {
                    if (!mask[static_cast<std::size_t>(first_signal + ch)]) continue;
                    const double a = attenuate(dep.emission[static_cast<std::size_t>(ch)], d, ra);
                    if (a <= 0.0) continue;
                    raw[static_cast<std::size_t>(ch)] += a;
                    contribs.push_back({dep.emitter, ch, a});
                }
            }
        }
    double signal_volume = 0.0;
    for (int ch = 0; ch < D; ++ch) {
        const double total = raw[static_cast<std::size_t>(ch)];
        if (!(total > 0.0)) continue;
        const auto ci = static_cast<std::size_t>(first_signal + ch);
        out.values[ci] = std::min(1.0, total);
        out.carrying[ci] = 1;
        ++out.v_in;
        signal_volume += out.values[ci];
    }
    out.volume[kEmissionBucket] = signal_volume;
    for (const auto& c : contribs) {
        const double total = raw[static_cast<std::size_t>(c.channel)];
        const double value = std::min(1.0, total);
        out.emitter_volume.emplace_back(c.emitter, value * c.amount / total);
    }
    std::sort(out.emitter_volume.begin(), out.emitter_volume.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < out.emitter_volume.size(); ++i) {
        if (w > 0 && out.emitter_volume[w - 1].first == out.emitter_volume[i].first)
            out.emitter_volume[w - 1].second += out.emitter_volume[i].second;
        else
            out.emitter_volume[w++] = out.emitter_volume[i];
    }
    out.emitter_volume.resize(w);
    for (double v : out.volume) out.v_total += v;
}

Sensation World::sense_preview(std::uint64_t id) {
    const Unit* u = find(id);
    if (!u) throw std::out_of_range("no such unit");
    compute_claimants();
    build_deposit_index();
    Sensation s;
    sense(*u, s);
    return s;
}

TickReport World::step() {
    TickReport rep;
    rep.tick = m_tick;
    const auto& P = m_cfg.physics;
    const std::uint64_t seed = m_cfg.world.master_seed;
    const bool ledger = m_cfg.world.collect_ledger;

    // (1) weather, (2) depletion
    m_streams.advance(m_tick);
    compute_claimants();
    build_deposit_index();

    for (const auto& u : m_units) rep.energy_before += u.energy;

    const std::size_t n = m_units.size();
    std::vector<UnitWork> work(n);
    if (ledger) rep.ledger.resize(n);

    CycleSettings settings;
    settings.tau = P.tau;
    settings.eps_p = P.eps_p;
    settings.kinds = m_kinds;

    const int stream_channels = m_cfg.streams.channel_count();

    // (3) sense, (4) evaluate, (5) learn, (6) predict and emit
    parallel_for(n, [&](std::size_t lo, std::size_t hi, int) {
        Sensation sens;
        CycleOutput out;
        std::vector<double> scratch;
        for (std::size_t i = lo; i < hi; ++i) {
            Unit& u = m_units[i];
            UnitWork& wk = work[i];
            sense(u, sens);

            const double err = prediction_error(sens.values, u.state.last_prediction, m_kinds, sens.carrying);
            const double c = u.last_corrupt ? 0.0 : compression_ratio(sens.v_in, u.last_v_repr, err);
            wk.step = energy_update(u.energy, c, sens.v_total, u.last_k_cost, P);
            wk.error = err;
            wk.volume = sens.volume;
            wk.v_total = sens.v_total;

            // Per-kind errors and the stream-only error used by the efficiency series.
            double base_sum = 0.0;
            int stream_scored = 0;
            for (const auto& s : m_cfg.streams.streams) {
                const auto first = static_cast<std::size_t>(s.first);
                const auto width = static_cast<std::size_t>(s.width);
                std::span<const std::uint8_t> scored(sens.carrying.data() + first, width);
                int cnt = 0;
                for (auto b : scored) cnt += b;
                if (cnt == 0) continue;
                const auto k = index_of(s.kind);
                wk.kind_error[k] = prediction_error(std::span<const double>(sens.values.data() + first, width),
                                                    std::span<const double>(u.state.last_prediction.data() + first, width),
                                                    std::span<const ChannelKind>(m_kinds.data() + first, width), scored);
                wk.kind_scored[k] = true;
                base_sum += m_baselines[k] * cnt;
                stream_scored += cnt;
            }
            if (stream_scored > 0) {
                wk.has_stream_data = true;
                wk.baseline = base_sum / stream_scored;
                const auto sc = static_cast<std::size_t>(stream_channels);
                wk.stream_error = prediction_error(std::span<const double>(sens.values.data(), sc),
                                                   std::span<const double>(u.state.last_prediction.data(), sc),
                                                   std::span<const ChannelKind>(m_kinds.data(), sc),
                                                   std::span<const std::uint8_t>(sens.carrying.data(), sc));
            }

            const double before = u.energy;
            u.energy = wk.step.e_next;

            ProfileWindow& pw = u.window;
            ++pw.ticks;
            pw.compute_cost += wk.step.compute_cost;
            pw.maintenance += wk.step.maintenance;
            for (std::size_t b = 0; b < kBuckets; ++b) pw.volume[b] += sens.volume[b];
            if (wk.step.gain > 0.0 && sens.v_total > 0.0) {
                for (std::size_t b = 0; b < kBuckets; ++b) pw.gain[b] += wk.step.gain * (sens.volume[b] / sens.v_total);
                for (const auto& [id, vol] : sens.emitter_volume)
                    pw.emitter_gain[id] += wk.step.gain * (vol / sens.v_total);
            }

            if (ledger) {
                EnergyLedgerEntry& e = rep.ledger[i];
                e.tick = m_tick;
                e.unit_id = u.id;
                e.energy_before = before;
                e.energy_after = u.energy;
                e.gain = wk.step.gain;
                e.compute_cost = wk.step.compute_cost;
                e.maintenance = wk.step.maintenance;
                if (wk.step.gain > 0.0 && sens.v_total > 0.0) {
                    for (auto k : kAllStreamKinds)
                        if (sens.volume[index_of(k)] > 0.0)
                            e.sources.push_back({SourceTag::of(k), sens.volume[index_of(k)] / sens.v_total});
                    for (const auto& [id, vol] : sens.emitter_volume)
                        e.sources.push_back({SourceTag::of_emitter(id), vol / sens.v_total});
                }
            }

            // (5) plasticity on the activations that earned this surplus
            wk.resets = hebbian_update_inplace(u.phenotype, u.state, wk.step.surplus, P);
            u.corruptions += wk.resets;

            // (6) next prediction and emission
            forward_cycle_inplace(u.phenotype, u.state, sens.values, settings, out, scratch);
            u.last_v_repr = out.v_repr;
            u.last_k_cost = out.k_cost;
            u.last_corrupt = out.corrupt;
            if (out.corrupt) ++u.corruptions;
            wk.emits = std::any_of(out.emission.begin(), out.emission.end(), [](double v) { return v > 0.0; });
            if (wk.emits) wk.emission = out.emission;
        }
    });

    std::vector<Deposit> fresh;
    for (std::size_t i = 0; i < n; ++i) {
        const UnitWork& wk = work[i];
        const Unit& u = m_units[i];
        rep.gain += wk.step.gain;
        rep.compute_cost += wk.step.compute_cost;
        rep.maintenance += wk.step.maintenance;
        if (u.last_corrupt) ++rep.corrupt;
        for (auto k : kAllStreamKinds)
            if (wk.kind_scored[index_of(k)]) {
                rep.mean_error[index_of(k)] += wk.kind_error[index_of(k)];
                ++rep.error_units[index_of(k)];
            }
        if (wk.has_stream_data) {
            rep.efficiency_cost += wk.step.compute_cost + wk.step.maintenance;
            rep.efficiency_improvement += std::max(wk.baseline - wk.stream_error, kEffEps);
            ++rep.efficiency_units;
        }
        if (wk.emits) fresh.push_back({u.x, u.y, u.id, wk.emission});
    }
    for (std::size_t k = 0; k < 4; ++k)
        if (rep.error_units[k] > 0) rep.mean_error[k] /= rep.error_units[k];
    m_deposits = std::move(fresh);

    // (7) death
    {
        std::vector<Unit> alive;
        alive.reserve(m_units.capacity());
        for (auto& u : m_units) {
            if (u.energy <= 0.0) {
                Event ev;
                ev.kind = Event::Kind::Death;
                ev.tick = m_tick;
                ev.unit_id = u.id;
                ev.parent_a = u.parent_a;
                ev.parent_b = u.parent_b;
                ev.genome_hash = genome_hash(u.genome);
                ev.energy = u.energy;
                ev.x = u.x;
                ev.y = u.y;
                ev.age = m_tick - u.birth_tick;
                rep.events.push_back(ev);
                rep.removed_energy += u.energy;
                ++rep.deaths;
            } else {
                alive.push_back(std::move(u));
            }
        }
        m_units = std::move(alive);
        rebuild_occupancy();
    }

    // (8) reproduction, ascending id; newborns do not reproduce this tick
    {
        const std::size_t parents = m_units.size();
        for (std::size_t i = 0; i < parents; ++i) {
            if (!(m_units[i].energy > P.repro_threshold)) continue;
            Neighborhood nbh;
            for (std::size_t o = 0; o < kNeighborOffsets.size(); ++o) {
                const int idx = m_occupancy[cell(wrap_x(m_units[i].x + kNeighborOffsets[o][1]),
                                                 wrap_y(m_units[i].y + kNeighborOffsets[o][0]))];
                nbh.occupant[o] = idx < 0 ? nullptr : &m_units[static_cast<std::size_t>(idx)];
            }
            Rng rng = stream_for(seed, m_units[i].id, static_cast<std::uint64_t>(m_tick), Phase::Reproduction);
            auto child = try_reproduce(m_units[i], nbh, P, m_cfg.rates, m_cfg.limits, rng);
            if (!child) {
                ++rep.deferred;
                continue;
            }
            m_units[i].energy = child->parent_energy;
            const int cx = wrap_x(m_units[i].x + child->dx);
            const int cy = wrap_y(m_units[i].y + child->dy);
            const std::uint64_t pa = m_units[i].id;
            Unit& c = add_unit(child->genome, cx, cy, child->child_energy);
            c.parent_a = pa;
            c.parent_b = child->partner_id;
            c.birth_tick = m_tick + 1;
            c.window.start_tick = m_tick + 1;

            Event ev;
            ev.kind = Event::Kind::Birth;
            ev.tick = m_tick;
            ev.unit_id = c.id;
            ev.parent_a = c.parent_a;
            ev.parent_b = c.parent_b;
            ev.genome_hash = genome_hash(c.genome);
            ev.energy = c.energy;
            ev.x = c.x;
            ev.y = c.y;
            rep.events.push_back(ev);
            ++rep.births;
        }
    }

    // (9) migration into a uniformly chosen empty neighbour
    for (std::size_t i = 0; i < m_units.size(); ++i) {
        Unit& u = m_units[i];
        Rng rng = stream_for(seed, u.id, static_cast<std::uint64_t>(m_tick), Phase::Migration);
        if (!rng.bernoulli(u.genome.params.move_prob)) continue;
        std::array<int, 8> empties{};
        int count = 0;
        for (std::size_t o = 0; o < kNeighborOffsets.size(); ++o) {
            const int nx = wrap_x(u.x + kNeighborOffsets[o][1]);
            const int ny = wrap_y(u.y + kNeighborOffsets[o][0]);
            if (m_occupancy[cell(nx, ny)] < 0) empties[static_cast<std::size_t>(count++)] = static_cast<int>(o);
        }
        if (count == 0) continue;
        const auto& off = kNeighborOffsets[static_cast<std::size_t>(empties[rng.below(static_cast<std::uint64_t>(count))])];
        m_occupancy[cell(u.x, u.y)] = -1;
        u.x = wrap_x(u.x + off[1]);
        u.y = wrap_y(u.y + off[0]);
        m_occupancy[cell(u.x, u.y)] = static_cast<int>(i);
    }

    // Aggregates over the survivors, using their current profile windows.
    rep.population = m_units.size();
    int noisy = 0;
    double entropy = 0.0;
    double nodes = 0.0;
    double edges = 0.0;
    const auto& noise_cfg = m_cfg.streams.get(StreamKind::Noise);
    for (const auto& u : m_units) {
        rep.energy_after += u.energy;
        nodes += u.genome.node_count;
        edges += static_cast<double>(u.genome.connections.size());
        bool admits_noise = false;
        for (int c = noise_cfg.first; c < noise_cfg.last(); ++c)
            admits_noise = admits_noise || u.phenotype.interface.receptor_mask[static_cast<std::size_t>(c)];
        if (noise_dominated(u.window, admits_noise)) ++noisy;
        if (auto h = specialization_entropy(u.window.gain)) {
            entropy += *h;
            ++rep.entropy_units;
        }
    }
    if (!m_units.empty()) {
        const auto pop = static_cast<double>(m_units.size());
        rep.mean_energy = rep.energy_after / pop;
        rep.noise_fraction = noisy / pop;
        rep.mean_nodes = nodes / pop;
        rep.mean_edges = edges / pop;
    }
    if (rep.entropy_units > 0) rep.mean_entropy = entropy / rep.entropy_units;

    // Tumbling profile windows aligned to multiples of W_m.
    const int wm = m_cfg.world.profile_window;
    if (wm > 0 && (m_tick + 1) % wm == 0) {
        for (auto& u : m_units) {
            UnitEnergyProfile rec;
            rec.tick_end = m_tick;
            rec.unit_id = u.id;
            for (int c = noise_cfg.first; c < noise_cfg.last(); ++c)
                rec.admits_noise = rec.admits_noise || u.phenotype.interface.receptor_mask[static_cast<std::size_t>(c)];
            rec.window = std::move(u.window);
            rep.profiles.push_back(std::move(rec));
            u.window = ProfileWindow{};
            u.window.start_tick = m_tick + 1;
        }
    }

    ++m_tick;
    return rep;
}

std::uint64_t World::state_hash() const {
    StateHasher h;
    h.add(m_tick);
    h.add(m_next_id);
    const auto& c = m_streams.cursors();
    h.add(c.numeric_cursor);
    h.add(c.numeric_running_max);
    h.add(c.text_cursor);
    h.add(c.numeric_wrapped);
    h.add(c.text_wrapped);
    for (auto k : kAllStreamKinds)
        for (const auto& b : m_streams.blobs(k)) {
            h.add(b.x0);
            h.add(b.y0);
            h.add(b.vx);
            h.add(b.vy);
            h.add(b.f0);
            h.add(b.a0);
            h.add(b.phase);
        }
    h.add(static_cast<std::uint64_t>(m_deposits.size()));
    for (const auto& d : m_deposits) {
        h.add(d.x);
        h.add(d.y);
        h.add(d.emitter);
        h.add(std::span<const double>(d.emission));
    }
    h.add(static_cast<std::uint64_t>(m_units.size()));
    for (const auto& u : m_units) {
        h.add(u.id);
        h.add(u.x);
        h.add(u.y);
        h.add(u.energy);
        h.add(genome_hash(u.genome));
        for (const auto& e : u.phenotype.connections) h.add(e.weight);
        h.add(std::span<const double>(u.state.activations));
        h.add(std::span<const double>(u.state.last_prediction));
        h.add(u.last_v_repr);
        h.add(u.last_k_cost);
        h.add(u.last_corrupt);
        h.add(u.birth_tick);
        h.add(u.parent_a);
        h.add(u.parent_b);
        h.add(u.corruptions);
        h.add(u.window.start_tick);
        h.add(u.window.ticks);
        for (double v : u.window.gain) h.add(v);
        for (double v : u.window.volume) h.add(v);
        h.add(u.window.compute_cost);
        h.add(u.window.maintenance);
        for (const auto& [id, g] : u.window.emitter_gain) {
            h.add(id);
            h.add(g);
        }
    }
    return h.digest();
}

namespace {

nlohmann::json window_json(const ProfileWindow& w) {
    nlohmann::json j;
    j["start_tick"] = w.start_tick;
    j["ticks"] = w.ticks;
    j["gain"] = w.gain;
    j["volume"] = w.volume;
    j["compute_cost"] = w.compute_cost;
    j["maintenance"] = w.maintenance;
    auto eg = nlohmann::json::array();
    for (const auto& [id, g] : w.emitter_gain) eg.push_back({id, g});
    j["emitter_gain"] = std::move(eg);
    return j;
}

ProfileWindow window_from(const nlohmann::json& j) {
    ProfileWindow w;
    w.start_tick = j.at("start_tick").get<std::int64_t>();
    w.ticks = j.at("ticks").get<int>();
    w.gain = j.at("gain").get<std::array<double, kBuckets>>();
    w.volume = j.at("volume").get<std::array<double, kBuckets>>();
    w.compute_cost = j.at("compute_cost").get<double>();
    w.maintenance = j.at("maintenance").get<double>();
    for (const auto& e : j.at("emitter_gain")) w.emitter_gain[e.at(0).get<std::uint64_t>()] = e.at(1).get<double>();
    return w;
}

nlohmann::json blob_json(const Blob& b) {
    return {{"x0", b.x0}, {"y0", b.y0}, {"vx", b.vx}, {"vy", b.vy}, {"f0", b.f0}, {"a0", b.a0}, {"phase", b.phase}};
}

Blob blob_from(const nlohmann::json& j) {
    Blob b;
    b.x0 = j.at("x0").get<double>();
    b.y0 = j.at("y0").get<double>();
    b.vx = j.at("vx").get<double>();
    b.vy = j.at("vy").get<double>();
    b.f0 = j.at("f0").get<double>();
    b.a0 = j.at("a0").get<double>();
    b.phase = j.at("phase").get<double>();
    return b;
}

}  // namespace

nlohmann::json World::to_json() const {
    nlohmann::json j;
    j["format"] = "mee-snapshot";
    j["version"] = kSnapshotVersion;
    j["config"] = m_cfg;
    j["baselines"] = m_baselines;
    j["tick"] = m_tick;
    j["next_id"] = m_next_id;
    j["cursors"] = m_streams.cursors();
    auto blobs = nlohmann::json::object();
    for (auto k : kAllStreamKinds) {
        auto arr = nlohmann::json::array();
        for (const auto& b : m_streams.blobs(k)) arr.push_back(blob_json(b));
        blobs[std::string(to_string(k))] = std::move(arr);
    }
    j["blobs"] = std::move(blobs);

    auto deps = nlohmann::json::array();
    for (const auto& d : m_deposits) deps.push_back({{"x", d.x}, {"y", d.y}, {"emitter", d.emitter}, {"emission", d.emission}});
    j["deposits"] = std::move(deps);

    auto units = nlohmann::json::array();
    for (const auto& u : m_units) {
        nlohmann::json ju;
        ju["id"] = u.id;
        ju["x"] = u.x;
        ju["y"] = u.y;
        ju["energy"] = u.energy;
        ju["genome"] = u.genome;
        std::vector<double> learned;
        learned.reserve(u.phenotype.connections.size());
        for (const auto& e : u.phenotype.connections) learned.push_back(e.weight);
        ju["phenotype_weights"] = std::move(learned);
        ju["activations"] = u.state.activations;
        ju["last_prediction"] = u.state.last_prediction;
        ju["last_v_repr"] = u.last_v_repr;
        ju["last_k_cost"] = u.last_k_cost;
        ju["last_corrupt"] = u.last_corrupt;
        ju["birth_tick"] = u.birth_tick;
        ju["parent_a"] = u.parent_a;
        ju["parent_b"] = u.parent_b;
        ju["corruptions"] = u.corruptions;
        ju["window"] = window_json(u.window);
        units.push_back(std::move(ju));
    }
    j["units"] = std::move(units);
    return j;
}

World World::from_json(const nlohmann::json& j, std::string corpus) {
    if (j.value("format", std::string{}) != "mee-snapshot") throw IoError("not a snapshot file");
    if (j.value("version", 0) != kSnapshotVersion) throw IoError("unsupported snapshot version");
    SimConfig cfg = j.at("config").get<SimConfig>();
    const int founders = cfg.world.founder_count;
    cfg.world.founder_count = 0;
    World w(cfg, std::move(corpus), j.at("baselines").get<PerStream>());
    w.m_cfg.world.founder_count = founders;

    w.m_tick = j.at("tick").get<std::int64_t>();
    w.m_streams.set_cursors(j.at("cursors").get<StreamCursors>());
    for (auto k : kAllStreamKinds) {
        std::vector<Blob> blobs;
        for (const auto& b : j.at("blobs").at(std::string(to_string(k)))) blobs.push_back(blob_from(b));
        w.m_streams.set_blobs(k, std::move(blobs));
    }
    for (const auto& d : j.at("deposits"))
        w.m_deposits.push_back({d.at("x").get<int>(), d.at("y").get<int>(), d.at("emitter").get<std::uint64_t>(),
                                d.at("emission").get<std::vector<double>>()});

    for (const auto& ju : j.at("units")) {
        Unit u;
        u.id = ju.at("id").get<std::uint64_t>();
        u.x = ju.at("x").get<int>();
        u.y = ju.at("y").get<int>();
        u.energy = ju.at("energy").get<double>();
        u.genome = ju.at("genome").get<Genome>();
        u.phenotype = u.genome;
        const auto learned = ju.at("phenotype_weights").get<std::vector<double>>();
        if (learned.size() != u.phenotype.connections.size()) throw IoError("snapshot: phenotype weights do not match genome edges");
        for (std::size_t e = 0; e < learned.size(); ++e) u.phenotype.connections[e].weight = learned[e];
        u.state.activations = ju.at("activations").get<std::vector<double>>();
        u.state.last_prediction = ju.at("last_prediction").get<std::vector<double>>();
        u.last_v_repr = ju.at("last_v_repr").get<int>();
        u.last_k_cost = ju.at("last_k_cost").get<double>();
        u.last_corrupt = ju.at("last_corrupt").get<bool>();
        u.birth_tick = ju.at("birth_tick").get<std::int64_t>();
        u.parent_a = ju.at("parent_a").get<std::uint64_t>();
        u.parent_b = ju.at("parent_b").get<std::uint64_t>();
        u.corruptions = ju.at("corruptions").get<int>();
        u.window = window_from(ju.at("window"));
        w.m_units.push_back(std::move(u));
    }
    w.m_next_id = j.at("next_id").get<std::uint64_t>();
    w.rebuild_occupancy();
    return w;
}

}  // namespace mee
