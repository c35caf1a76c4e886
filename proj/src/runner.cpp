#include "mee/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <zlib.h>

#include "mee/errors.hpp"
#include "mee/metrics.hpp"

namespace fs = std::filesystem;

namespace mee {

namespace {

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
std::string num(T v) requires std::is_integral_v<T> {
    return std::to_string(v);
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir / "snapshots", ec);
    if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
    const auto probe = dir / ".write-test";
    {
        std::ofstream f(probe);
        if (!f) throw IoError("run directory is not writable: " + dir.string());
    }
    fs::remove(probe, ec);
}

std::string snapshot_name(std::int64_t tick, bool gzip) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%08lld.json", static_cast<long long>(tick));
    return std::string(buf) + (gzip ? ".gz" : "");
}

const char* kTickHeader =
    "tick,population,births,deaths,deferred,corrupt,mean_energy,energy_before,energy_after,gain,compute_cost,"
    "maintenance,removed_energy,err_numeric,err_text,err_noise,err_temporal,noise_fraction,mean_entropy,"
    "entropy_units,eff_cost,eff_improvement,eff_units,mean_nodes,mean_edges";

const char* kLedgerHeader =
    "tick_end,unit_id,start_tick,ticks,admits_noise,gain_numeric,gain_text,gain_noise,gain_temporal,gain_emission,"
    "volume_numeric,volume_text,volume_noise,volume_temporal,volume_emission,compute_cost,maintenance";

class Telemetry {
public:
    Telemetry(const fs::path& dir, bool full_ledger)
        : m_ticks(open_out(dir / "ticks.csv")),
          m_events(open_out(dir / "events.jsonl")),
          m_ledger(open_out(dir / "ledger.csv")),
          m_emitters(open_out(dir / "emitters.csv")),
          m_hashes(open_out(dir / "hashes.csv")) {
        m_ticks << kTickHeader << '\n';
        m_ledger << kLedgerHeader << '\n';
        m_emitters << "tick_end,unit_id,emitter_id,gain\n";
        m_hashes << "tick,hash\n";
        if (full_ledger) {
            m_full = open_out(dir / "ledger_full.csv");
            m_full << "tick,unit_id,energy_before,energy_after,gain,compute_cost,maintenance,sources\n";
        }
    }

    void tick(const TickReport& r) {
        m_ticks << r.tick << ',' << r.population << ',' << r.births << ',' << r.deaths << ',' << r.deferred << ','
                << r.corrupt << ',' << num(r.mean_energy) << ',' << num(r.energy_before) << ',' << num(r.energy_after)
                << ',' << num(r.gain) << ',' << num(r.compute_cost) << ',' << num(r.maintenance) << ','
                << num(r.removed_energy);
        for (double e : r.mean_error) m_ticks << ',' << num(e);
        m_ticks << ',' << num(r.noise_fraction) << ',' << num(r.mean_entropy) << ',' << r.entropy_units << ','
                << num(r.efficiency_cost) << ',' << num(r.efficiency_improvement) << ',' << r.efficiency_units << ','
                << num(r.mean_nodes) << ',' << num(r.mean_edges) << '\n';

        for (const auto& e : r.events) {
            nlohmann::json j{{"tick", e.tick},
                             {"kind", e.kind == Event::Kind::Birth ? "birth" : "death"},
                             {"unit", e.unit_id},
                             {"parent_a", e.parent_a},
                             {"parent_b", e.parent_b},
                             {"genome_hash", hex64(e.genome_hash)},
                             {"energy", e.energy},
                             {"x", e.x},
                             {"y", e.y},
                             {"age", e.age}};
            m_events << j.dump() << '\n';
        }

        for (const auto& p : r.profiles) {
            const auto& w = p.window;
            m_ledger << p.tick_end << ',' << p.unit_id << ',' << w.start_tick << ',' << w.ticks << ','
                     << (p.admits_noise ? 1 : 0);
            for (double g : w.gain) m_ledger << ',' << num(g);
            for (double v : w.volume) m_ledger << ',' << num(v);
            m_ledger << ',' << num(w.compute_cost) << ',' << num(w.maintenance) << '\n';
            for (const auto& [id, g] : w.emitter_gain)
                m_emitters << p.tick_end << ',' << p.unit_id << ',' << id << ',' << num(g) << '\n';
        }

        if (m_full.is_open())
            for (const auto& e : r.ledger) {
                m_full << e.tick << ',' << e.unit_id << ',' << num(e.energy_before) << ',' << num(e.energy_after) << ','
                       << num(e.gain) << ',' << num(e.compute_cost) << ',' << num(e.maintenance) << ',';
                for (std::size_t i = 0; i < e.sources.size(); ++i) {
                    if (i) m_full << ';';
                    m_full << e.sources[i].source.label() << '=' << num(e.sources[i].share);
                }
                m_full << '\n';
            }
    }

    void hash(std::int64_t tick, std::uint64_t h) { m_hashes << tick << ',' << hex64(h) << '\n'; }

    void flush() {
        for (auto* f : {&m_ticks, &m_events, &m_ledger, &m_emitters, &m_hashes, &m_full})
            if (f->is_open()) {
                f->flush();
                if (!*f) throw IoError("write failed in run directory");
            }
    }

private:
    std::ofstream m_ticks, m_events, m_ledger, m_emitters, m_hashes, m_full;
};

nlohmann::json stream_layout(const SimConfig& cfg) {
    auto layout = nlohmann::json::array();
    for (const auto& s : cfg.streams.streams)
        layout.push_back({{"kind", to_string(s.kind)},
                          {"first", s.first},
                          {"width", s.width},
                          {"channel_kind", channel_kind_of(s.kind) == ChannelKind::Discrete ? "discrete" : "continuous"}});
    layout.push_back({{"kind", "signal"},
                      {"first", cfg.streams.channel_count()},
                      {"width", cfg.world.emission_channels},
                      {"channel_kind", "continuous"}});
    return layout;
}

nlohmann::json per_stream_json(const PerStream& v) {
    nlohmann::json j;
    for (auto k : kAllStreamKinds) j[std::string(to_string(k))] = v[index_of(k)];
    return j;
}

void write_manifest(const fs::path& dir, const SimConfig& cfg, const ValidationResult& v, std::int64_t start,
                    std::int64_t end, const std::string& resumed_from) {
    nlohmann::json m;
    m["code_version"] = kCodeVersion;
    m["config"] = cfg;
    m["config_text"] = render_config(cfg);
    m["master_seed"] = cfg.world.master_seed;
    m["stream_layout"] = stream_layout(cfg);
    m["sensory_width"] = cfg.sensory_width();
    m["baselines"] = {{"pass_through", per_stream_json(v.baselines.pass_through)},
                      {"constant", per_stream_json(v.baselines.constant)},
                      {"best", per_stream_json(v.baselines.best)},
                      {"ticks", kBaselineTicks}};
    m["guard_worst_margin"] = v.guard.worst_margin;
    m["start_tick"] = start;
    m["end_tick"] = end;
    m["entropy_buckets"] = {"numeric", "text", "noise", "temporal", "emission"};
    if (!resumed_from.empty()) m["resumed_from"] = resumed_from;
    auto f = open_out(dir / "manifest.json");
    f << m.dump(2) << '\n';
}

RunSummary drive(World& world, const fs::path& dir, std::int64_t ticks, std::ostream& log) {
    const auto& tel = world.config().telemetry;
    Telemetry out(dir, tel.full_ledger);
    const std::int64_t start = world.tick();
    const std::int64_t end = start + ticks;
    const int hash_every = std::max(1, tel.hash_every);
    const int snap_every = tel.snapshot_every;

    out.hash(start, world.state_hash());
    write_snapshot(world, (dir / "snapshots" / snapshot_name(start, tel.gzip)).string(), tel.gzip);

    const auto t0 = std::chrono::steady_clock::now();
    while (world.tick() < end) {
        const TickReport rep = world.step();
        out.tick(rep);
        const std::int64_t now = world.tick();
        if (now % hash_every == 0 || now == end) out.hash(now, world.state_hash());
        if ((snap_every > 0 && now % snap_every == 0) || now == end)
            write_snapshot(world, (dir / "snapshots" / snapshot_name(now, tel.gzip)).string(), tel.gzip);
        if (now % 1000 == 0) {
            out.flush();
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log << "tick " << now << " population " << world.units().size() << " (" << num(std::round(secs * 10) / 10)
                << " s)\n";
        }
    }
    out.flush();

    RunSummary s;
    s.dir = dir.string();
    s.start_tick = start;
    s.end_tick = world.tick();
    s.final_hash = world.state_hash();
    s.final_population = world.units().size();
    s.collapsed = world.units().empty();
    nlohmann::json j{{"start_tick", s.start_tick},
                     {"end_tick", s.end_tick},
                     {"final_hash", hex64(s.final_hash)},
                     {"final_population", s.final_population},
                     {"collapsed", s.collapsed}};
    auto f = open_out(dir / "summary.json");
    f << j.dump(2) << '\n';
    return s;
}

std::string guard_message(const GuardReport& g) {
    std::string msg = "guard inequality violated";
    for (const auto& l : g.lines) msg += "\n" + l;
    return msg;
}

}  // namespace

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

BaselineReport compute_baselines(const SimConfig& cfg, const std::string& corpus) {
    return run_baseline_oracle(cfg.streams, corpus, kBaselineTicks, cfg.world.master_seed, cfg.physics.eps_p);
}

ValidationResult validate_config(const SimConfig& cfg) {
    cfg.validate();
    const std::string corpus = load_corpus(cfg.streams.corpus_path);
    ValidationResult v;
    v.baselines = compute_baselines(cfg, corpus);
    v.guard = validate_params(cfg.physics, cfg.sensory_width(), v.baselines.best);
    return v;
}

void print_validation(const SimConfig& cfg, const ValidationResult& v, std::ostream& out) {
    const auto& p = cfg.physics;
    out << "sensory width W_s = " << cfg.sensory_width() << '\n';
    for (auto k : kAllStreamKinds) {
        const double e = v.baselines.best[index_of(k)];
        const double lhs = p.alpha * cfg.sensory_width() * std::exp(-e);
        out << to_string(k) << ": baseline error " << num(e) << " (pass-through " << num(v.baselines.pass_through[index_of(k)])
            << ", constant " << num(v.baselines.constant[index_of(k)]) << "); alpha*W_s*exp(-baseline) = " << num(lhs)
            << ", gamma = " << num(p.gamma) << ", margin " << num(p.gamma - lhs) << '\n';
    }
    for (const auto& l : v.guard.lines) out << l << '\n';
    out << (v.guard.ok ? "ok" : "refused") << " (worst margin " << num(v.guard.worst_margin) << ")\n";
}

void write_snapshot(const World& w, const std::string& path, bool gzip) {
    const std::string text = w.to_json().dump() + "\n";
    if (!gzip) {
        auto f = open_out(path);
        f << text;
        if (!f) throw IoError("cannot write " + path);
        return;
    }
    gzFile gz = gzopen(path.c_str(), "wb9");
    if (!gz) throw IoError("cannot write " + path);
    const int wrote = gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
    if (gzclose(gz) != Z_OK || wrote != static_cast<int>(text.size())) throw IoError("cannot write " + path);
}

nlohmann::json read_snapshot_json(const std::string& path) {
    std::string text;
    if (path.size() > 3 && path.ends_with(".gz")) {
        gzFile gz = gzopen(path.c_str(), "rb");
        if (!gz) throw IoError("cannot read " + path);
        char buf[1 << 16];
        int n;
        while ((n = gzread(gz, buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(n));
        gzclose(gz);
        if (n < 0) throw IoError("corrupt gzip stream in " + path);
    } else {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot read " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed snapshot " + path + ": " + e.what());
    }
}

World read_snapshot(const std::string& path) {
    const auto j = read_snapshot_json(path);
    const SimConfig cfg = j.at("config").get<SimConfig>();
    return World::from_json(j, load_corpus(cfg.streams.corpus_path));
}

std::vector<std::string> list_snapshots(const std::string& run_dir) {
    std::vector<std::string> out;
    const fs::path dir = fs::path(run_dir) / "snapshots";
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.starts_with("snapshot_")) out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

RunSummary run_simulation(const SimConfig& cfg_in, const std::string& out_dir, std::int64_t ticks, std::ostream& log) {
    if (ticks < 0) throw ConfigError("ticks must be >= 0");
    SimConfig cfg = cfg_in;
    cfg.world.collect_ledger = cfg.telemetry.full_ledger;
    const ValidationResult v = validate_config(cfg);
    if (!v.guard.ok) throw ConfigError(guard_message(v.guard));

    const fs::path dir(out_dir);
    prepare_dir(dir);
    write_manifest(dir, cfg, v, 0, ticks, "");
    World world(cfg, load_corpus(cfg.streams.corpus_path), v.baselines.best);
    return drive(world, dir, ticks, log);
}

RunSummary resume_simulation(const std::string& snapshot_path, const std::string& out_dir, std::int64_t ticks,
                             std::ostream& log) {
    if (ticks < 0) throw ConfigError("ticks must be >= 0");
    World world = read_snapshot(snapshot_path);
    SimConfig cfg = world.config();
    const ValidationResult v = validate_config(cfg);
    if (!v.guard.ok) throw ConfigError(guard_message(v.guard));
    const fs::path dir(out_dir);
    prepare_dir(dir);
    write_manifest(dir, cfg, v, world.tick(), world.tick() + ticks, snapshot_path);
    return drive(world, dir, ticks, log);
}

// ---------------------------------------------------------------------------
// analysis

namespace {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t col(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw IoError("missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    }
    std::vector<double> column(const std::string& name) const {
        const auto c = col(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

Csv read_csv(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw IoError("missing " + p.string());
    Csv csv;
    std::string line;
    if (!std::getline(f, line)) throw IoError("empty " + p.string());
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) csv.header.push_back(cell);
    }
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(csv.header.size());
        const char* p0 = line.data();
        const char* end = p0 + line.size();
        while (p0 <= end) {
            const char* comma = std::find(p0, end, ',');
            double v = 0.0;
            std::from_chars(p0, comma, v);
            row.push_back(v);
            p0 = comma + 1;
        }
        if (row.size() != csv.header.size()) throw IoError("malformed row in " + p.string());
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

nlohmann::json read_json_file(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw IoError("missing " + p.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed " + p.string() + ": " + e.what());
    }
}

// Profiles grouped by window end tick.
std::map<std::int64_t, std::vector<UnitEnergyProfile>> read_profiles(const fs::path& dir) {
    if (!fs::exists(dir / "ledger.csv")) throw IoError("missing ledger " + (dir / "ledger.csv").string());
    const Csv ledger = read_csv(dir / "ledger.csv");
    std::map<std::int64_t, std::vector<UnitEnergyProfile>> out;
    std::map<std::pair<std::int64_t, std::uint64_t>, std::size_t> where;
    for (const auto& r : ledger.rows) {
        UnitEnergyProfile p;
        p.tick_end = static_cast<std::int64_t>(r[0]);
        p.unit_id = static_cast<std::uint64_t>(r[1]);
        p.window.start_tick = static_cast<std::int64_t>(r[2]);
        p.window.ticks = static_cast<int>(r[3]);
        p.admits_noise = r[4] != 0.0;
        for (std::size_t b = 0; b < kBuckets; ++b) {
            p.window.gain[b] = r[5 + b];
            p.window.volume[b] = r[10 + b];
        }
        p.window.compute_cost = r[15];
        p.window.maintenance = r[16];
        auto& v = out[p.tick_end];
        where[{p.tick_end, p.unit_id}] = v.size();
        v.push_back(std::move(p));
    }
    if (fs::exists(dir / "emitters.csv")) {
        const Csv em = read_csv(dir / "emitters.csv");
        for (const auto& r : em.rows) {
            const auto key = std::make_pair(static_cast<std::int64_t>(r[0]), static_cast<std::uint64_t>(r[1]));
            auto it = where.find(key);
            if (it == where.end()) continue;
            out[key.first][it->second].window.emitter_gain[static_cast<std::uint64_t>(r[2])] = r[3];
        }
    }
    return out;
}

nlohmann::json mk_json(const MannKendall& mk) {
    return {{"n", mk.n}, {"s", mk.s}, {"z", mk.z}, {"p_value", mk.p_value}, {"trend", mk.trend}};
}

double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

constexpr std::size_t kBlock = 100;

}  // namespace

nlohmann::json analyze_runs(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    if (run_dirs.empty()) throw ConfigError("analyze needs at least one run directory");
    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string());

    nlohmann::json report;
    report["code_version"] = kCodeVersion;
    report["entropy_note"] =
        "specialization entropy uses five gain buckets (numeric, text, noise, temporal, emission); range [0, log2 5]";
    auto runs = nlohmann::json::array();
    auto p1 = nlohmann::json::array();
    auto p2 = nlohmann::json::array();
    auto p3 = nlohmann::json::array();
    auto p5 = nlohmann::json::array();
    auto p6 = nlohmann::json::array();
    std::vector<std::vector<Genome>> finals;

    auto series_out = open_out(out / "series.csv");
    series_out << "run,block_start,noise_fraction,mean_entropy,mean_nodes,mean_edges,efficiency,population\n";
    auto trophic_out = open_out(out / "trophic.csv");
    trophic_out << "run,tick_end";
    for (int l = 1; l <= kMaxTrophicLevel; ++l) trophic_out << ",level_" << l;
    trophic_out << '\n';
    auto complexity_out = open_out(out / "complexity.csv");
    complexity_out << "run,tick,mean_nodes,mean_edges\n";

    for (std::size_t ri = 0; ri < run_dirs.size(); ++ri) {
        const fs::path dir(run_dirs[ri]);
        const auto manifest = read_json_file(dir / "manifest.json");
        const Csv ticks = read_csv(dir / "ticks.csv");
        const auto profiles = read_profiles(dir);
        const auto snaps = list_snapshots(dir.string());

        const auto tick_col = ticks.column("tick");
        const auto pop = ticks.column("population");
        std::vector<std::size_t> alive;
        for (std::size_t i = 0; i < pop.size(); ++i)
            if (pop[i] > 0) alive.push_back(i);
        const bool collapsed = !pop.empty() && pop.back() == 0;

        nlohmann::json run{{"dir", dir.string()},
                           {"master_seed", manifest.at("master_seed")},
                           {"ticks", ticks.rows.size()},
                           {"final_population", pop.empty() ? 0.0 : pop.back()},
                           {"collapsed", collapsed},
                           {"surviving_ticks", alive.size()}};
        runs.push_back(run);

        auto pick = [&](const std::string& name) {
            const auto col = ticks.column(name);
            std::vector<double> v;
            v.reserve(alive.size());
            for (auto i : alive) v.push_back(col[i]);
            return v;
        };

        // Prediction 2: noise fraction, first vs final tenth of surviving ticks.
        const auto noise = pick("noise_fraction");
        {
            const std::size_t tenth = std::max<std::size_t>(1, noise.size() / 10);
            nlohmann::json j{{"run", ri}};
            if (noise.size() >= 2) {
                const double first = mean_of(std::span(noise).first(tenth));
                const double last = mean_of(std::span(noise).last(tenth));
                j["first_tenth"] = first;
                j["final_tenth"] = last;
                j["declined"] = last < first;
                j["trend"] = mk_json(mann_kendall(block_means(noise, kBlock)));
            } else {
                j["declined"] = nullptr;
            }
            p2.push_back(j);
        }

        // Prediction 1: mean specialization entropy of survivors per profile window.
        {
            std::vector<double> window_means;
            std::vector<std::int64_t> window_ticks;
            for (const auto& [tick_end, ps] : profiles) {
                double s = 0.0;
                int n = 0;
                for (const auto& p : ps)
                    if (auto h = specialization_entropy(p.window.gain)) {
                        s += *h;
                        ++n;
                    }
                if (n > 0) {
                    window_means.push_back(s / n);
                    window_ticks.push_back(tick_end);
                }
            }
            nlohmann::json j{{"run", ri}, {"window_ticks", window_ticks}, {"window_means", window_means}};
            if (window_means.size() >= 2) {
                j["baseline"] = window_means.front();
                j["final"] = window_means.back();
                j["decreased"] = window_means.back() < window_means.front();
                j["trend"] = mk_json(mann_kendall(window_means));
            } else {
                j["decreased"] = nullptr;
            }
            p1.push_back(j);
        }

        // Prediction 3: trophic levels per window, chaining the previous assignment.
        {
            std::map<std::uint64_t, int> previous;
            std::vector<double> upper_share;
            nlohmann::json last;
            for (const auto& [tick_end, ps] : profiles) {
                const auto t = assign_trophic_levels(ps, previous.empty() ? nullptr : &previous);
                previous = t.level;
                int upper = 0;
                trophic_out << ri << ',' << tick_end;
                for (int l = 1; l <= kMaxTrophicLevel; ++l) {
                    trophic_out << ',' << t.histogram[static_cast<std::size_t>(l)];
                    if (l >= 2) upper += t.histogram[static_cast<std::size_t>(l)];
                }
                trophic_out << '\n';
                upper_share.push_back(ps.empty() ? 0.0 : static_cast<double>(upper) / static_cast<double>(ps.size()));
                last = {{"tick_end", tick_end}, {"histogram", t.histogram}, {"flow", t.flow}};
            }
            nlohmann::json j{{"run", ri}, {"last_window", last}, {"share_above_level_1", upper_share}};
            if (upper_share.size() >= 3) j["trend"] = mk_json(mann_kendall(upper_share));
            p3.push_back(j);
        }

        // Prediction 5: complexity from the per-tick means and from snapshots.
        {
            std::vector<ComplexityPoint> pts;
            std::vector<Genome> last_pop;
            for (const auto& path : snaps) {
                const auto js = read_snapshot_json(path);
                ComplexityPoint p;
                p.tick = js.at("tick").get<std::int64_t>();
                std::vector<Genome> genomes;
                for (const auto& u : js.at("units")) genomes.push_back(u.at("genome").get<Genome>());
                for (const auto& g : genomes) {
                    p.mean_nodes += g.node_count;
                    p.mean_edges += static_cast<double>(g.connections.size());
                }
                if (!genomes.empty()) {
                    p.mean_nodes /= static_cast<double>(genomes.size());
                    p.mean_edges /= static_cast<double>(genomes.size());
                }
                complexity_out << ri << ',' << p.tick << ',' << num(p.mean_nodes) << ',' << num(p.mean_edges) << '\n';
                pts.push_back(p);
                last_pop = std::move(genomes);
            }
            finals.push_back(std::move(last_pop));
            const auto cs = complexity_series(pts);
            std::vector<double> t;
            for (auto i : alive) t.push_back(tick_col[i]);
            const auto nodes = pick("mean_nodes");
            const auto edges = pick("mean_edges");
            nlohmann::json j{{"run", ri},
                             {"snapshot_node_slope", cs.node_slope},
                             {"snapshot_edge_slope", cs.edge_slope},
                             {"tick_node_slope", ols_slope(t, nodes)},
                             {"tick_edge_slope", ols_slope(t, edges)},
                             {"node_trend", mk_json(mann_kendall(block_means(nodes, kBlock)))},
                             {"edge_trend", mk_json(mann_kendall(block_means(edges, kBlock)))}};
            if (!pts.empty()) {
                j["first_mean_nodes"] = pts.front().mean_nodes;
                j["last_mean_nodes"] = pts.back().mean_nodes;
            }
            p5.push_back(j);
        }

        // Prediction 6: cost per unit of error reduction.
        {
            const auto cost = pick("eff_cost");
            const auto imp = pick("eff_improvement");
            const auto units = pick("eff_units");
            std::vector<double> c, d;
            std::size_t degenerate = 0;
            for (std::size_t i = 0; i < cost.size(); ++i) {
                if (units[i] <= 0) continue;
                c.push_back(cost[i]);
                d.push_back(imp[i]);
                if (imp[i] <= units[i] * 1e-6 * (1 + 1e-9)) ++degenerate;
            }
            const auto eff = efficiency_series(c, d);
            const auto blocks = block_means(eff, kBlock);
            nlohmann::json j{{"run", ri}, {"ticks", eff.size()}, {"degenerate_ticks", degenerate}};
            if (blocks.size() >= 3) {
                const auto mk = mann_kendall(blocks);
                j["trend"] = mk_json(mk);
                j["first_block"] = blocks.front();
                j["last_block"] = blocks.back();
                j["monotone_decrease_supported"] = mk.trend == "decreasing";
            }
            p6.push_back(j);

            const auto nb = block_means(noise, kBlock);
            const auto eb = block_means(pick("mean_entropy"), kBlock);
            const auto mnb = block_means(pick("mean_nodes"), kBlock);
            const auto meb = block_means(pick("mean_edges"), kBlock);
            const auto pb = block_means(pick("population"), kBlock);
            for (std::size_t b = 0; b < nb.size(); ++b)
                series_out << ri << ',' << (alive.empty() ? 0 : static_cast<std::int64_t>(tick_col[alive[b * kBlock]])) << ','
                           << num(nb[b]) << ',' << num(eb[b]) << ',' << num(mnb[b]) << ',' << num(meb[b]) << ','
                           << (b < blocks.size() ? num(blocks[b]) : std::string()) << ',' << num(pb[b]) << '\n';
        }
    }

    report["runs"] = runs;
    report["prediction_1_specialization"] = p1;
    report["prediction_2_noise_avoidance"] = p2;
    report["prediction_3_trophic_levels"] = p3;
    report["prediction_5_complexity"] = p5;
    report["prediction_6_efficiency"] = p6;

    if (run_dirs.size() < 2) {
        report["prediction_4_path_divergence"] = "requires >= 2 runs";
    } else {
        auto pairs = nlohmann::json::array();
        for (std::size_t a = 0; a < finals.size(); ++a)
            for (std::size_t b = a + 1; b < finals.size(); ++b) {
                nlohmann::json j{{"runs", {a, b}}};
                if (finals[a].size() < 2 || finals[b].size() < 2) {
                    j["status"] = "population too small";
                } else {
                    const auto d = path_divergence(finals[a], finals[b], 0x5eedULL);
                    j["inter"] = d.inter;
                    j["intra"] = d.intra;
                    j["inter_exceeds_intra"] = d.inter > d.intra;
                }
                pairs.push_back(j);
            }
        report["prediction_4_path_divergence"] = pairs;
    }

    auto f = open_out(out / "report.json");
    f << report.dump(2) << '\n';
    return report;
}

}  // namespace mee
