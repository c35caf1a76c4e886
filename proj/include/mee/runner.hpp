#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mee/config.hpp"
#include "mee/physics.hpp"
#include "mee/streams.hpp"
#include "mee/world.hpp"

namespace mee {

inline constexpr const char* kCodeVersion = "mee 0.1.0";
inline constexpr int kBaselineTicks = 2000;

/// Baseline errors for the streams described by `cfg`, seeded from its master seed.
BaselineReport compute_baselines(const SimConfig& cfg, const std::string& corpus);

struct ValidationResult {
    BaselineReport baselines;
    GuardReport guard;
};

/// Loads the corpus, runs the baseline oracle and checks the guard.
ValidationResult validate_config(const SimConfig& cfg);

/// Human-readable margins, one line per stream kind, plus any GUARD-FAIL lines.
void print_validation(const SimConfig& cfg, const ValidationResult& v, std::ostream& out);

struct RunSummary {
    std::string dir;
    std::int64_t start_tick = 0;
    std::int64_t end_tick = 0;
    std::uint64_t final_hash = 0;
    std::size_t final_population = 0;
    bool collapsed = false;
};

/// Fresh run of `ticks` ticks into `out_dir`. Refuses (ConfigError carrying the
/// GUARD-FAIL lines) when the guard does not hold; IoError when the directory
/// cannot be written.
RunSummary run_simulation(const SimConfig& cfg, const std::string& out_dir, std::int64_t ticks, std::ostream& log);

/// Continues from a snapshot file for `ticks` more ticks, writing a new run directory.
RunSummary resume_simulation(const std::string& snapshot_path, const std::string& out_dir, std::int64_t ticks,
                             std::ostream& log);

/// Runs every metric over one or more run directories and writes report.json
/// plus the series CSVs into `out_dir`. Returns the report.
nlohmann::json analyze_runs(const std::vector<std::string>& run_dirs, const std::string& out_dir);

void write_snapshot(const World& w, const std::string& path, bool gzip);
nlohmann::json read_snapshot_json(const std::string& path);
World read_snapshot(const std::string& path);

/// Snapshot files of a run directory, sorted by tick.
std::vector<std::string> list_snapshots(const std::string& run_dir);

std::string hex64(std::uint64_t v);

}  // namespace mee
