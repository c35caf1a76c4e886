#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mee/channel.hpp"
#include "mee/physics.hpp"

namespace mee {

/// Intensity blobs ("weather") for one stream.
struct BlobParams {
    int count = 3;            // 0 means uniform full intensity everywhere
    double radius = 10.0;     // linear falloff to zero at this distance
    double drift_speed = 0.2; // cells per tick
};

struct StreamConfig {
    StreamKind kind = StreamKind::Numeric;
    int first = 0;  // first channel
    int width = 0;  // channel count, [first, first + width)

    std::string sequence = "fibonacci";  // numeric: fibonacci | primes

    // temporal
    double frequency = 0.05;   // cycles per tick
    double amplitude = 1.0;
    double freq_drift = 0.5;   // relative swing of the frequency
    double amp_drift = 0.3;    // relative swing of the amplitude
    double drift_period = 2000.0;

    BlobParams blobs;

    int last() const noexcept { return first + width; }
};

struct StreamsConfig {
    std::vector<StreamConfig> streams;
    double intensity_floor = 0.05;
    std::string corpus_path = "data/corpus.txt";

    /// Numeric 4, Text 16, Noise 8, Temporal 4.
    static StreamsConfig defaults();

    /// Total stream channel count (union of the ranges).
    int channel_count() const;
    const StreamConfig& get(StreamKind k) const;
    StreamConfig& get(StreamKind k);
    /// Empty when ranges are disjoint and cover [0, channel_count()) with one stream per kind.
    std::string validate() const;
};

struct Blob {
    double x0 = 0.0;
    double y0 = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double f0 = 0.05;   // temporal frequency
    double a0 = 1.0;    // temporal amplitude
    double phase = 0.0; // temporal phase

    bool operator==(const Blob&) const = default;
};

/// Generator cursors that must survive a snapshot.
struct StreamCursors {
    std::int64_t numeric_cursor = 0;
    double numeric_running_max = 0.0;
    std::int64_t text_cursor = 0;
    bool numeric_wrapped = false;
    bool text_wrapped = false;

    bool operator==(const StreamCursors&) const = default;
};

void to_json(nlohmann::json& j, const StreamCursors& c);
void from_json(const nlohmann::json& j, StreamCursors& c);

std::vector<double> fibonacci_table();
std::vector<double> prime_table(std::size_t count);
/// Raw bytes of a corpus file; throws IoError naming the path.
std::string load_corpus(const std::string& path);

/// The four generators plus their intensity fields on a width x height torus.
/// Values produced by `advance(t)` are the data for tick t.
class StreamField {
public:
    StreamField(StreamsConfig cfg, int width, int height, std::uint64_t master_seed, std::string corpus);

    /// Move blobs to their tick-t positions, rebuild intensity fields and draw
    /// the tick-t window of every generator.
    void advance(std::int64_t tick);

    std::int64_t tick() const noexcept { return m_tick; }
    const StreamsConfig& config() const noexcept { return m_cfg; }
    int width() const noexcept { return m_width; }
    int height() const noexcept { return m_height; }

    double intensity(StreamKind k, int x, int y) const;
    /// Channel values of stream k at a cell for the current tick, or nullopt
    /// where intensity is below the floor. Continuous values are scaled by
    /// intensity; bits are passed through.
    std::optional<std::vector<double>> generate_window(StreamKind k, int x, int y) const;
    /// Writes the same values into `out` (width of the stream); returns false when absent.
    bool window_into(StreamKind k, int x, int y, std::span<double> out) const;

    /// Unscaled window of a globally cursored stream (numeric, text, noise).
    const std::vector<double>& global_window(StreamKind k) const;

    const std::vector<Blob>& blobs(StreamKind k) const { return m_blobs[index_of(k)]; }
    void set_blobs(StreamKind k, std::vector<Blob> blobs);
    static std::array<double, 2> blob_center(const Blob& b, std::int64_t tick, int width, int height);

    const StreamCursors& cursors() const noexcept { return m_cursors; }
    void set_cursors(const StreamCursors& c) { m_cursors = c; }

private:
    void rebuild_intensity(std::size_t stream);
    void draw_numeric();
    void draw_text();
    void draw_noise();
    double temporal_value(const Blob& b, int channel, int width) const;

    StreamsConfig m_cfg;
    int m_width;
    int m_height;
    std::uint64_t m_seed;
    std::string m_corpus;
    std::vector<double> m_sequence;
    std::int64_t m_tick = -1;
    StreamCursors m_cursors;

    std::array<std::vector<Blob>, 4> m_blobs;
    std::array<std::vector<double>, 4> m_intensity;   // per cell
    std::array<std::vector<int>, 4> m_dominant;       // blob index per cell, -1 if none
    std::array<std::vector<double>, 4> m_global;      // current raw windows
    Blob m_default_temporal;
};

/// Naive-predictor errors per stream kind.
struct BaselineReport {
    PerStream pass_through{};  // previous value
    PerStream constant{};      // mid-range 0.5
    PerStream best{};          // smaller of the two
};

/// Runs the two naive predictors against each generator at full intensity.
/// Requires ticks >= 1000.
BaselineReport run_baseline_oracle(const StreamsConfig& cfg, const std::string& corpus, int ticks,
                                   std::uint64_t seed, double eps_p);

}  // namespace mee
