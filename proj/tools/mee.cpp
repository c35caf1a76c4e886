#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mee/config.hpp"
#include "mee/errors.hpp"
#include "mee/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Micro-Ecology Engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::int64_t ticks = 0;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "run a simulation");
    run->add_option("-c,--config", config_path, "config file")->required();
    run->add_option("-o,--out", out_dir, "run directory")->required();
    run->add_option("-t,--ticks", ticks, "ticks to simulate")->required();
    run->add_option("-s,--seed", seed, "override world.master_seed");

    std::vector<std::string> run_dirs;
    std::string report_dir;
    auto* analyze = app.add_subcommand("analyze", "measure the predictions over run directories");
    analyze->add_option("runs", run_dirs, "run directories")->required();
    analyze->add_option("-o,--out", report_dir, "report directory (default: first run directory)");

    auto* validate = app.add_subcommand("validate", "check the guard inequality for a config");
    validate->add_option("-c,--config", config_path, "config file")->required();

    std::string snapshot;
    auto* resume = app.add_subcommand("resume", "continue a run from a snapshot");
    resume->add_option("snapshot", snapshot, "snapshot file")->required();
    resume->add_option("-o,--out", out_dir, "new run directory")->required();
    resume->add_option("-t,--ticks", ticks, "further ticks")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            mee::SimConfig cfg = mee::load_config(config_path);
            if (seed) cfg.world.master_seed = *seed;
            const auto s = mee::run_simulation(cfg, out_dir, ticks, std::cerr);
            std::cout << "final tick " << s.end_tick << " population " << s.final_population << " hash "
                      << mee::hex64(s.final_hash) << (s.collapsed ? " (collapsed)" : "") << '\n';
        } else if (*analyze) {
            const auto out = report_dir.empty() ? run_dirs.front() : report_dir;
            mee::analyze_runs(run_dirs, out);
            std::cout << "wrote " << out << "/report.json\n";
        } else if (*validate) {
            const mee::SimConfig cfg = mee::load_config(config_path);
            const auto v = mee::validate_config(cfg);
            mee::print_validation(cfg, v, std::cout);
            return v.guard.ok ? kOk : kConfigError;
        } else if (*resume) {
            const auto s = mee::resume_simulation(snapshot, out_dir, ticks, std::cerr);
            std::cout << "final tick " << s.end_tick << " population " << s.final_population << " hash "
                      << mee::hex64(s.final_hash) << (s.collapsed ? " (collapsed)" : "") << '\n';
        }
    } catch (const mee::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const mee::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    }
    return kOk;
}
