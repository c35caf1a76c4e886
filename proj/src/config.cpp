#include "mee/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mee/errors.hpp"

namespace mee {

namespace {

using Ref = std::variant<int*, double*, bool*, std::uint64_t*, std::string*>;

struct Field {
    std::string section;
    std::string key;
    std::function<Ref(SimConfig&)> ref;
};

std::vector<Field> schema() {
    std::vector<Field> f;
    auto add = [&f](std::string section, std::string key, std::function<Ref(SimConfig&)> ref) {
        f.push_back({std::move(section), std::move(key), std::move(ref)});
    };
    add("world", "width", [](SimConfig& c) -> Ref { return &c.world.width; });
    add("world", "height", [](SimConfig& c) -> Ref { return &c.world.height; });
    add("world", "founder_count", [](SimConfig& c) -> Ref { return &c.world.founder_count; });
    add("world", "r_s", [](SimConfig& c) -> Ref { return &c.world.r_s; });
    add("world", "r_a", [](SimConfig& c) -> Ref { return &c.world.r_a; });
    add("world", "move_prob", [](SimConfig& c) -> Ref { return &c.world.move_prob; });
    add("world", "master_seed", [](SimConfig& c) -> Ref { return &c.world.master_seed; });
    add("world", "founder_nodes", [](SimConfig& c) -> Ref { return &c.world.founder_nodes; });
    add("world", "founder_steps", [](SimConfig& c) -> Ref { return &c.world.founder_steps; });
    add("world", "sigma_init", [](SimConfig& c) -> Ref { return &c.world.sigma_init; });
    add("world", "emission_gain", [](SimConfig& c) -> Ref { return &c.world.emission_gain; });
    add("world", "emission_channels", [](SimConfig& c) -> Ref { return &c.world.emission_channels; });
    add("world", "profile_window", [](SimConfig& c) -> Ref { return &c.world.profile_window; });

    add("physics", "alpha", [](SimConfig& c) -> Ref { return &c.physics.alpha; });
    add("physics", "beta", [](SimConfig& c) -> Ref { return &c.physics.beta; });
    add("physics", "gamma", [](SimConfig& c) -> Ref { return &c.physics.gamma; });
    add("physics", "tau", [](SimConfig& c) -> Ref { return &c.physics.tau; });
    add("physics", "eta", [](SimConfig& c) -> Ref { return &c.physics.eta; });
    add("physics", "lambda_decay", [](SimConfig& c) -> Ref { return &c.physics.lambda_decay; });
    add("physics", "e_start", [](SimConfig& c) -> Ref { return &c.physics.e_start; });
    add("physics", "repro_threshold", [](SimConfig& c) -> Ref { return &c.physics.repro_threshold; });
    add("physics", "v_max", [](SimConfig& c) -> Ref { return &c.physics.v_max; });
    add("physics", "w_cap", [](SimConfig& c) -> Ref { return &c.physics.w_cap; });
    add("physics", "eps_p", [](SimConfig& c) -> Ref { return &c.physics.eps_p; });

    add("rates", "weight_rate", [](SimConfig& c) -> Ref { return &c.rates.weight_rate; });
    add("rates", "weight_sigma", [](SimConfig& c) -> Ref { return &c.rates.weight_sigma; });
    add("rates", "topo_rate", [](SimConfig& c) -> Ref { return &c.rates.topo_rate; });
    add("rates", "param_rate", [](SimConfig& c) -> Ref { return &c.rates.param_rate; });
    add("rates", "interface_factor", [](SimConfig& c) -> Ref { return &c.rates.interface_factor; });
    add("rates", "recomb_prob", [](SimConfig& c) -> Ref { return &c.rates.recomb_prob; });

    add("variation", "node_min", [](SimConfig& c) -> Ref { return &c.limits.bounds.node_min; });
    add("variation", "node_max", [](SimConfig& c) -> Ref { return &c.limits.bounds.node_max; });
    add("variation", "steps_cap", [](SimConfig& c) -> Ref { return &c.limits.bounds.steps_cap; });
    add("variation", "strict_blind_deletion", [](SimConfig& c) -> Ref { return &c.limits.strict_blind_deletion; });
    add("variation", "new_edge_sigma", [](SimConfig& c) -> Ref { return &c.limits.new_edge_sigma; });

    add("streams", "intensity_floor", [](SimConfig& c) -> Ref { return &c.streams.intensity_floor; });
    add("streams", "corpus", [](SimConfig& c) -> Ref { return &c.streams.corpus_path; });
    for (auto kind : kAllStreamKinds) {
        const std::string p = std::string(to_string(kind)) + ".";
        add("streams", p + "first", [kind](SimConfig& c) -> Ref { return &c.streams.get(kind).first; });
        add("streams", p + "width", [kind](SimConfig& c) -> Ref { return &c.streams.get(kind).width; });
        add("streams", p + "blob_count", [kind](SimConfig& c) -> Ref { return &c.streams.get(kind).blobs.count; });
        add("streams", p + "blob_radius", [kind](SimConfig& c) -> Ref { return &c.streams.get(kind).blobs.radius; });
        add("streams", p + "drift_speed",
            [kind](SimConfig& c) -> Ref { return &c.streams.get(kind).blobs.drift_speed; });
    }
    add("streams", "numeric.sequence", [](SimConfig& c) -> Ref { return &c.streams.get(StreamKind::Numeric).sequence; });
    add("streams", "temporal.frequency",
        [](SimConfig& c) -> Ref { return &c.streams.get(StreamKind::Temporal).frequency; });
    add("streams", "temporal.amplitude",
        [](SimConfig& c) -> Ref { return &c.streams.get(StreamKind::Temporal).amplitude; });
    add("streams", "temporal.freq_drift",
        [](SimConfig& c) -> Ref { return &c.streams.get(StreamKind::Temporal).freq_drift; });
    add("streams", "temporal.amp_drift",
        [](SimConfig& c) -> Ref { return &c.streams.get(StreamKind::Temporal).amp_drift; });
    add("streams", "temporal.drift_period",
        [](SimConfig& c) -> Ref { return &c.streams.get(StreamKind::Temporal).drift_period; });

    add("telemetry", "snapshot_every", [](SimConfig& c) -> Ref { return &c.telemetry.snapshot_every; });
    add("telemetry", "hash_every", [](SimConfig& c) -> Ref { return &c.telemetry.hash_every; });
    add("telemetry", "gzip", [](SimConfig& c) -> Ref { return &c.telemetry.gzip; });
    add("telemetry", "full_ledger", [](SimConfig& c) -> Ref { return &c.telemetry.full_ledger; });
    return f;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& text, const std::string& where) {
    T value{};
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError("bad value '" + text + "' for " + where);
    return value;
}

void assign(Ref ref, const std::string& raw, const std::string& where) {
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                *p = raw;
            } else if constexpr (std::is_same_v<T, bool>) {
                if (raw == "true" || raw == "1")
                    *p = true;
                else if (raw == "false" || raw == "0")
                    *p = false;
                else
                    throw ConfigError("bad boolean '" + raw + "' for " + where);
            } else {
                *p = parse_number<T>(raw, where);
            }
        },
        ref);
}

std::string render(Ref ref) {
    return std::visit(
        [](auto* p) -> std::string {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>)
                return *p;
            else if constexpr (std::is_same_v<T, bool>)
                return *p ? "true" : "false";
            else if constexpr (std::is_same_v<T, double>)
                return format_double(*p);
            else
                return std::to_string(*p);
        },
        ref);
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void SimConfig::validate() const {
    const auto& w = world;
    if (w.width < 3 || w.height < 3) throw ConfigError("world: width and height must be >= 3");
    if (w.r_s < 1 || w.r_a < 1) throw ConfigError("world: r_s and r_a must be >= 1");
    if (w.founder_count < 0 || w.founder_count > w.width * w.height)
        throw ConfigError("world: founder_count must be in [0, width*height]");
    if (w.founder_nodes < 5 || w.founder_nodes > 50) throw ConfigError("world: founder_nodes must be in [5, 50]");
    if (w.founder_steps < 1 || w.founder_steps > limits.bounds.steps_cap)
        throw ConfigError("world: founder_steps must be in [1, steps_cap]");
    if (w.emission_channels < 1) throw ConfigError("world: emission_channels must be >= 1");
    if (w.profile_window < 1) throw ConfigError("world: profile_window must be >= 1");
    if (!(w.move_prob >= 0.0 && w.move_prob <= 1.0)) throw ConfigError("world: move_prob outside [0, 1]");

    const auto& p = physics;
    if (!(p.alpha > 0 && p.beta > 0 && p.gamma > 0 && p.tau > 0 && p.eta > 0 && p.e_start > 0 && p.v_max > 0))
        throw ConfigError("physics: alpha, beta, gamma, tau, eta, e_start, v_max must be > 0");
    if (!(p.lambda_decay >= 0)) throw ConfigError("physics: lambda_decay must be >= 0");
    if (!(p.eps_p > 0 && p.eps_p < 0.5)) throw ConfigError("physics: eps_p must be in (0, 0.5)");

    for (double v : {rates.weight_rate, rates.topo_rate, rates.param_rate, rates.interface_factor, rates.recomb_prob})
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("rates: probabilities must lie in [0, 1]");
    if (!(rates.weight_sigma > 0)) throw ConfigError("rates: weight_sigma must be > 0");
    if (limits.bounds.node_min < 1 || limits.bounds.node_min > w.founder_nodes ||
        limits.bounds.node_max < w.founder_nodes)
        throw ConfigError("variation: node bounds must bracket founder_nodes");
    if (limits.bounds.steps_cap < 1) throw ConfigError("variation: steps_cap must be >= 1");
    if (auto err = streams.validate(); !err.empty()) throw ConfigError("streams: " + err);
    if (telemetry.snapshot_every < 1 || telemetry.hash_every < 1)
        throw ConfigError("telemetry: snapshot_every and hash_every must be >= 1");
}

SimConfig parse_config(const std::string& text, const std::string& base_dir) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    SimConfig cfg;
    auto fields = schema();
    for (const auto& [section, children] : tree) {
        if (children.empty() && !children.data().empty())
            throw ConfigError("config key '" + section + "' appears outside a section");
        for (const auto& [key, node] : children) {
            auto it = std::find_if(fields.begin(), fields.end(),
                                   [&](const Field& f) { return f.section == section && f.key == key; });
            if (it == fields.end()) throw ConfigError("unknown config key [" + section + "] " + key);
            assign(it->ref(cfg), trim(node.data()), "[" + section + "] " + key);
        }
    }
    auto& corpus = cfg.streams.corpus_path;
    if (!corpus.empty() && std::filesystem::path(corpus).is_relative()) {
        const auto candidate = std::filesystem::path(base_dir) / corpus;
        if (std::filesystem::exists(candidate)) corpus = candidate.lexically_normal().string();
    }
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto base = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), base.empty() ? "." : base.string());
}

std::string render_config(const SimConfig& cfg) {
    SimConfig copy = cfg;
    std::ostringstream out;
    std::string current;
    for (const auto& f : schema()) {
        if (f.section != current) {
            if (!current.empty()) out << "\n";
            out << "[" << f.section << "]\n";
            current = f.section;
        }
        out << f.key << " = " << render(f.ref(copy)) << "\n";
    }
    return out.str();
}

void to_json(nlohmann::json& j, const SimConfig& cfg) {
    SimConfig copy = cfg;
    j = nlohmann::json::object();
    for (const auto& f : schema()) {
        std::visit([&](auto* p) { j[f.section][f.key] = *p; }, f.ref(copy));
    }
}

void from_json(const nlohmann::json& j, SimConfig& cfg) {
    cfg = SimConfig{};
    for (const auto& f : schema()) {
        const auto& section = j.at(f.section);
        if (!section.contains(f.key)) continue;
        std::visit([&](auto* p) { *p = section.at(f.key).get<std::remove_pointer_t<decltype(p)>>(); }, f.ref(cfg));
    }
}

}  // namespace mee
