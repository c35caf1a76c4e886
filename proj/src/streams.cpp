#include "mee/streams.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <sodium.h>

#include "mee/errors.hpp"
#include "mee/rng.hpp"

namespace mee {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double v, double period) {
    double r = std::fmod(v, period);
    return r < 0.0 ? r + period : r;
}

double torus_delta(double a, double b, double period) {
    double d = std::abs(a - b);
    return std::min(d, period - d);
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

StreamsConfig StreamsConfig::defaults() {
    StreamsConfig c;
    StreamConfig numeric;
    numeric.kind = StreamKind::Numeric;
    numeric.first = 0;
    numeric.width = 4;
    StreamConfig text;
    text.kind = StreamKind::Text;
    text.first = 4;
    text.width = 16;
    StreamConfig noise;
    noise.kind = StreamKind::Noise;
    noise.first = 20;
    noise.width = 8;
    StreamConfig temporal;
    temporal.kind = StreamKind::Temporal;
    temporal.first = 28;
    temporal.width = 4;
    c.streams = {numeric, text, noise, temporal};
    return c;
}

int StreamsConfig::channel_count() const {
    int n = 0;
    for (const auto& s : streams) n = std::max(n, s.last());
    return n;
}

const StreamConfig& StreamsConfig::get(StreamKind k) const {
    for (const auto& s : streams)
        if (s.kind == k) return s;
    throw ConfigError("no stream configured for kind " + std::string(to_string(k)));
}

StreamConfig& StreamsConfig::get(StreamKind k) {
    return const_cast<StreamConfig&>(static_cast<const StreamsConfig&>(*this).get(k));
}

std::string StreamsConfig::validate() const {
    if (streams.size() != 4) return "exactly four streams are required";
    std::array<int, 4> seen{};
    for (const auto& s : streams) ++seen[index_of(s.kind)];
    for (auto k : kAllStreamKinds)
        if (seen[index_of(k)] != 1) return "stream kind " + std::string(to_string(k)) + " must appear exactly once";
    const int n = channel_count();
    std::vector<int> owner(static_cast<std::size_t>(n), 0);
    for (const auto& s : streams) {
        if (s.first < 0 || s.width < 1) return "stream " + std::string(to_string(s.kind)) + " has an empty range";
        if (s.kind == StreamKind::Text && s.width % 8 != 0) return "text stream width must be a multiple of 8";
        for (int c = s.first; c < s.last(); ++c) ++owner[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < n; ++c) {
        if (owner[static_cast<std::size_t>(c)] == 0) return "channel " + std::to_string(c) + " is not owned by any stream";
        if (owner[static_cast<std::size_t>(c)] > 1) return "channel " + std::to_string(c) + " is owned by two streams";
    }
    if (!(intensity_floor >= 0.0 && intensity_floor <= 1.0)) return "intensity_floor outside [0, 1]";
    for (const auto& s : streams) {
        if (s.kind == StreamKind::Numeric && s.sequence != "fibonacci" && s.sequence != "primes")
            return "numeric sequence must be fibonacci or primes";
        if (s.blobs.count < 0 || !(s.blobs.radius > 0.0)) return "invalid blob parameters";
    }
    return {};
}

void to_json(nlohmann::json& j, const StreamCursors& c) {
    j = nlohmann::json{{"numeric_cursor", c.numeric_cursor},
                       {"numeric_running_max", c.numeric_running_max},
                       {"text_cursor", c.text_cursor},
                       {"numeric_wrapped", c.numeric_wrapped},
                       {"text_wrapped", c.text_wrapped}};
}

void from_json(const nlohmann::json& j, StreamCursors& c) {
    c.numeric_cursor = j.at("numeric_cursor").get<std::int64_t>();
    c.numeric_running_max = j.at("numeric_running_max").get<double>();
    c.text_cursor = j.at("text_cursor").get<std::int64_t>();
    c.numeric_wrapped = j.at("numeric_wrapped").get<bool>();
    c.text_wrapped = j.at("text_wrapped").get<bool>();
}

// ---------------------------------------------------------------------------
// generators

std::vector<double> fibonacci_table() {
    // F_1 .. F_92 fit in 64 bits; stored as doubles.
    std::vector<double> out;
    std::uint64_t a = 1, b = 1;
    out.push_back(1.0);
    out.push_back(1.0);
    for (int i = 3; i <= 92; ++i) {
        const std::uint64_t c = a + b;
        out.push_back(static_cast<double>(c));
        a = b;
        b = c;
    }
    return out;
}

std::vector<double> prime_table(std::size_t count) {
    std::vector<double> out;
    for (std::uint64_t n = 2; out.size() < count; ++n) {
        bool prime = true;
        for (std::uint64_t d = 2; d * d <= n; ++d)
            if (n % d == 0) {
                prime = false;
                break;
            }
        if (prime) out.push_back(static_cast<double>(n));
    }
    return out;
}

std::string load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string bytes = ss.str();
    if (bytes.empty()) throw IoError("corpus file is empty: " + path);
    return bytes;
}

StreamField::StreamField(StreamsConfig cfg, int width, int height, std::uint64_t master_seed, std::string corpus)
    : m_cfg(std::move(cfg)), m_width(width), m_height(height), m_seed(master_seed), m_corpus(std::move(corpus)) {
    if (auto err = m_cfg.validate(); !err.empty()) throw ConfigError("streams: " + err);
    if (sodium_init() < 0) throw ConfigError("libsodium failed to initialise");

    const auto& numeric = m_cfg.get(StreamKind::Numeric);
    m_sequence = numeric.sequence == "primes" ? prime_table(10000) : fibonacci_table();
    if (static_cast<int>(m_sequence.size()) < numeric.width) throw ConfigError("numeric window wider than sequence");
    if (m_corpus.empty()) m_corpus = std::string(1, '\0');

    for (const auto& s : m_cfg.streams) {
        const auto idx = index_of(s.kind);
        Rng rng(derive_key({m_seed, idx, static_cast<std::uint64_t>(Phase::Weather)}));
        auto& blobs = m_blobs[idx];
        for (int b = 0; b < s.blobs.count; ++b) {
            Blob blob;
            blob.x0 = rng.uniform() * width;
            blob.y0 = rng.uniform() * height;
            const double heading = rng.uniform() * kTwoPi;
            blob.vx = s.blobs.drift_speed * std::cos(heading);
            blob.vy = s.blobs.drift_speed * std::sin(heading);
            blob.f0 = s.frequency * (0.5 + rng.uniform());
            blob.a0 = s.amplitude;
            blob.phase = rng.uniform() * kTwoPi;
            blobs.push_back(blob);
        }
        m_intensity[idx].assign(static_cast<std::size_t>(width * height), 1.0);
        m_dominant[idx].assign(static_cast<std::size_t>(width * height), -1);
        m_global[idx].assign(static_cast<std::size_t>(s.width), 0.0);
    }
    const auto& temporal = m_cfg.get(StreamKind::Temporal);
    m_default_temporal.f0 = temporal.frequency;
    m_default_temporal.a0 = temporal.amplitude;
}

void StreamField::set_blobs(StreamKind k, std::vector<Blob> blobs) {
    m_blobs[index_of(k)] = std::move(blobs);
    if (m_tick >= 0) rebuild_intensity(index_of(k));
}

std::array<double, 2> StreamField::blob_center(const Blob& b, std::int64_t tick, int width, int height) {
    const double t = static_cast<double>(tick);
    return {wrap(b.x0 + b.vx * t, width), wrap(b.y0 + b.vy * t, height)};
}

void StreamField::rebuild_intensity(std::size_t s) {
    auto& field = m_intensity[s];
    auto& dom = m_dominant[s];
    const auto& blobs = m_blobs[s];
    if (blobs.empty()) {
        std::fill(field.begin(), field.end(), 1.0);
        std::fill(dom.begin(), dom.end(), -1);
        return;
    }
    std::fill(field.begin(), field.end(), 0.0);
    std::fill(dom.begin(), dom.end(), -1);
    double r = 1.0;
    for (const auto& sc : m_cfg.streams)
        if (index_of(sc.kind) == s) r = sc.blobs.radius;
    for (std::size_t b = 0; b < blobs.size(); ++b) {
        const auto [cx, cy] = blob_center(blobs[b], m_tick, m_width, m_height);
        for (int y = 0; y < m_height; ++y) {
            const double dy = torus_delta(y, cy, m_height);
            if (dy >= r) continue;
            for (int x = 0; x < m_width; ++x) {
                const double dx = torus_delta(x, cx, m_width);
                const double d = std::sqrt(dx * dx + dy * dy);
                const double v = d < r ? 1.0 - d / r : 0.0;
                const auto cell = static_cast<std::size_t>(y * m_width + x);
                if (v > field[cell]) {
                    field[cell] = v;
                    dom[cell] = static_cast<int>(b);
                }
            }
        }
    }
}

void StreamField::draw_numeric() {
    const auto& cfg = m_cfg.get(StreamKind::Numeric);
    const auto len = static_cast<std::int64_t>(m_sequence.size());
    auto& c = m_cursors;
    if (c.numeric_cursor + cfg.width > len) {
        static std::atomic<bool> logged{false};
        if (!c.numeric_wrapped && !logged.exchange(true))
            std::clog << "[streams] numeric sequence exhausted; cursor wraps to start\n";
        c.numeric_wrapped = true;
        c.numeric_cursor = 0;
        c.numeric_running_max = 0.0;
    }
    auto& out = m_global[index_of(StreamKind::Numeric)];
    for (int i = 0; i < cfg.width; ++i)
        c.numeric_running_max =
            std::max(c.numeric_running_max, m_sequence[static_cast<std::size_t>(c.numeric_cursor + i)]);
    for (int i = 0; i < cfg.width; ++i)
        out[static_cast<std::size_t>(i)] =
            m_sequence[static_cast<std::size_t>(c.numeric_cursor + i)] / c.numeric_running_max;
    c.numeric_cursor += 1;
}

void StreamField::draw_text() {
    const auto& cfg = m_cfg.get(StreamKind::Text);
    const int bytes = cfg.width / 8;
    auto& out = m_global[index_of(StreamKind::Text)];
    auto& c = m_cursors;
    const auto len = static_cast<std::int64_t>(m_corpus.size());
    for (int b = 0; b < bytes; ++b) {
        if (c.text_cursor >= len) {
            static std::atomic<bool> logged{false};
            if (!c.text_wrapped && !logged.exchange(true)) std::clog << "[streams] corpus exhausted; cursor wraps to start\n";
            c.text_wrapped = true;
            c.text_cursor = 0;
        }
        const auto byte = static_cast<unsigned char>(m_corpus[static_cast<std::size_t>(c.text_cursor++)]);
        for (int bit = 0; bit < 8; ++bit)
            out[static_cast<std::size_t>(b * 8 + bit)] = ((byte >> (7 - bit)) & 1U) ? 1.0 : 0.0;
    }
}

void StreamField::draw_noise() {
    const auto& cfg = m_cfg.get(StreamKind::Noise);
    // Key a fresh ChaCha20 stream per tick from (seed, tick): bits are never reused,
    // and a resumed run draws the same bits as an unbroken one.
    unsigned char material[16];
    const std::uint64_t parts[2] = {m_seed, static_cast<std::uint64_t>(m_tick)};
    std::memcpy(material, parts, sizeof material);
    static constexpr unsigned char kKey[] = "mee-noise-stream-key-v1";
    unsigned char seed[randombytes_SEEDBYTES];
    crypto_generichash(seed, sizeof seed, material, sizeof material, kKey, sizeof kKey - 1);
    std::vector<unsigned char> buf(static_cast<std::size_t>((cfg.width + 7) / 8));
    randombytes_buf_deterministic(buf.data(), buf.size(), seed);
    auto& out = m_global[index_of(StreamKind::Noise)];
    for (int i = 0; i < cfg.width; ++i)
        out[static_cast<std::size_t>(i)] = ((buf[static_cast<std::size_t>(i / 8)] >> (i % 8)) & 1U) ? 1.0 : 0.0;
}

double StreamField::temporal_value(const Blob& b, int channel, int width) const {
    const auto& cfg = m_cfg.get(StreamKind::Temporal);
    const double t = static_cast<double>(m_tick);
    const double swing = std::sin(kTwoPi * t / cfg.drift_period);
    const double f = b.f0 * (1.0 + cfg.freq_drift * swing);
    const double amp = std::clamp(b.a0 * (1.0 + cfg.amp_drift * std::cos(kTwoPi * t / cfg.drift_period)), 0.0, 1.0);
    const double sample_t = t + static_cast<double>(channel) / static_cast<double>(width);
    return 0.5 + 0.5 * amp * std::sin(kTwoPi * f * sample_t + b.phase);
}

void StreamField::advance(std::int64_t tick) {
    m_tick = tick;
    for (std::size_t s = 0; s < 4; ++s) rebuild_intensity(s);
    draw_numeric();
    draw_text();
    draw_noise();
}

double StreamField::intensity(StreamKind k, int x, int y) const {
    return m_intensity[index_of(k)][static_cast<std::size_t>(y * m_width + x)];
}

const std::vector<double>& StreamField::global_window(StreamKind k) const { return m_global[index_of(k)]; }

bool StreamField::window_into(StreamKind k, int x, int y, std::span<double> out) const {
    const auto idx = index_of(k);
    const auto cell = static_cast<std::size_t>(y * m_width + x);
    const double level = m_intensity[idx][cell];
    if (level < m_cfg.intensity_floor) return false;
    const auto& cfg = m_cfg.get(k);
    switch (k) {
        case StreamKind::Numeric:
            for (int i = 0; i < cfg.width; ++i) out[static_cast<std::size_t>(i)] = m_global[idx][static_cast<std::size_t>(i)] * level;
            break;
        case StreamKind::Text:
        case StreamKind::Noise:
            std::copy(m_global[idx].begin(), m_global[idx].end(), out.begin());
            break;
        case StreamKind::Temporal: {
            const int dom = m_dominant[idx][cell];
            const Blob& b = dom < 0 ? m_default_temporal : m_blobs[idx][static_cast<std::size_t>(dom)];
            for (int i = 0; i < cfg.width; ++i)
                out[static_cast<std::size_t>(i)] = temporal_value(b, i, cfg.width) * level;
            break;
        }
    }
    return true;
}

std::optional<std::vector<double>> StreamField::generate_window(StreamKind k, int x, int y) const {
    std::vector<double> out(static_cast<std::size_t>(m_cfg.get(k).width));
    if (!window_into(k, x, y, out)) return std::nullopt;
    return out;
}

// ---------------------------------------------------------------------------
// baseline oracle

BaselineReport run_baseline_oracle(const StreamsConfig& cfg, const std::string& corpus, int ticks,
                                   std::uint64_t seed, double eps_p) {
    if (ticks < 1000) throw ConfigError("baseline oracle needs at least 1000 ticks");
    StreamsConfig flat = cfg;
    for (auto& s : flat.streams) s.blobs.count = 0;
    StreamField field(flat, 1, 1, seed, corpus);

    BaselineReport report;
    PerStream pass_sum{}, const_sum{};
    std::array<std::vector<double>, 4> prev;
    int scored_ticks = 0;
    for (int t = 0; t < ticks; ++t) {
        field.advance(t);
        for (auto k : kAllStreamKinds) {
            const auto idx = index_of(k);
            const auto window = *field.generate_window(k, 0, 0);
            const std::vector<ChannelKind> kinds(window.size(), channel_kind_of(k));
            if (t > 0) {
                std::vector<double> pass = prev[idx];
                if (channel_kind_of(k) == ChannelKind::Discrete)
                    for (auto& p : pass) p = std::clamp(p, eps_p, 1.0 - eps_p);
                const std::vector<double> mid(window.size(), 0.5);
                pass_sum[idx] += prediction_error(window, pass, kinds);
                const_sum[idx] += prediction_error(window, mid, kinds);
            }
            prev[idx] = window;
        }
        if (t > 0) ++scored_ticks;
    }
    for (auto k : kAllStreamKinds) {
        const auto idx = index_of(k);
        report.pass_through[idx] = pass_sum[idx] / scored_ticks;
        report.constant[idx] = const_sum[idx] / scored_ticks;
        report.best[idx] = std::min(report.pass_through[idx], report.constant[idx]);
    }
    return report;
}

}  // namespace mee
