#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mee/errors.hpp"
#include "mee/runner.hpp"
#include "support.hpp"

using namespace mee;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

SimConfig small_config(std::uint64_t seed = 1) {
    SimConfig cfg = test::micro_config(16, true);
    cfg.world.founder_count = 40;
    cfg.world.master_seed = seed;
    cfg.world.profile_window = 20;
    cfg.telemetry.snapshot_every = 30;
    return cfg;
}

struct Cli {
    int code = -1;
    std::string out;
};

Cli cli(const std::string& args, const fs::path& scratch) {
    const fs::path log = scratch / "cli.log";
    const std::string cmd = std::string(MEE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write_config(const SimConfig& cfg, const fs::path& dir, const std::string& name) {
    const fs::path p = dir / name;
    std::ofstream(p) << render_config(cfg);
    return p;
}

std::ostringstream sink;

}  // namespace

TEST_CASE("config text round trip and strictness") {
    const SimConfig cfg = small_config(7);
    const SimConfig back = parse_config(render_config(cfg));
    CHECK(render_config(back) == render_config(cfg));
    CHECK(nlohmann::json(back).dump() == nlohmann::json(cfg).dump());
    CHECK_THROWS_AS(parse_config("[world]\nwidht = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[weather]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[world]\nwidth = many\n"), ConfigError);
}

TEST_CASE("zero ticks writes the manifest and the initial snapshot") {
    const auto dir = test::scratch_dir("zero");
    const auto s = run_simulation(small_config(), (dir / "run").string(), 0, sink);
    CHECK(s.end_tick == 0);
    CHECK(fs::exists(dir / "run" / "manifest.json"));
    const auto snaps = list_snapshots((dir / "run").string());
    REQUIRE(snaps.size() == 1);
    CHECK(read_snapshot_json(snaps.front()).at("tick") == 0);
    CHECK(line_count(dir / "run" / "ticks.csv") == 1);  // header only
    CHECK(line_count(dir / "run" / "events.jsonl") == 0);
}

TEST_CASE("repeated runs are byte identical") {
    const auto dir = test::scratch_dir("twice");
    const auto a = run_simulation(small_config(), (dir / "a").string(), 60, sink);
    const auto b = run_simulation(small_config(), (dir / "b").string(), 60, sink);
    CHECK(a.final_hash == b.final_hash);
    CHECK(slurp(dir / "a" / "hashes.csv") == slurp(dir / "b" / "hashes.csv"));
    CHECK(slurp(dir / "a" / "ticks.csv") == slurp(dir / "b" / "ticks.csv"));
    const auto sa = list_snapshots((dir / "a").string());
    const auto sb = list_snapshots((dir / "b").string());
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) CHECK(slurp(sa[i]) == slurp(sb[i]));
}

TEST_CASE("snapshots reload to the recorded hash, and resume matches an unbroken run") {
    const auto dir = test::scratch_dir("resume");
    SimConfig cfg = small_config(3);
    cfg.telemetry.gzip = true;
    run_simulation(cfg, (dir / "full").string(), 60, sink);

    std::map<std::int64_t, std::string> recorded;
    {
        std::ifstream in(dir / "full" / "hashes.csv");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) recorded[std::stoll(line.substr(0, line.find(',')))] = line.substr(line.find(',') + 1);
    }
    const auto snaps = list_snapshots((dir / "full").string());
    REQUIRE(snaps.size() == 3);  // 0, 30, 60
    for (const auto& s : snaps) {
        const World w = read_snapshot(s);
        CHECK(hex64(w.state_hash()) == recorded.at(w.tick()));
    }

    const auto r = resume_simulation(snaps[1], (dir / "resumed").string(), 30, sink);
    CHECK(r.start_tick == 30);
    CHECK(r.end_tick == 60);
    std::ifstream in(dir / "resumed" / "hashes.csv");
    std::string line;
    std::getline(in, line);
    int checked = 0;
    while (std::getline(in, line)) {
        const auto t = std::stoll(line.substr(0, line.find(',')));
        CHECK(line.substr(line.find(',') + 1) == recorded.at(t));
        ++checked;
    }
    CHECK(checked == 31);
    CHECK(read_snapshot_json((dir / "resumed" / "manifest.json").string()).at("resumed_from") == snaps[1]);
}

TEST_CASE("guard violation refuses to start") {
    const auto dir = test::scratch_dir("guard");
    SimConfig cfg = small_config();
    // alpha * W_s * exp(-baseline) is about 0.9 for the numeric stream.
    cfg.physics.gamma = 0.5;
    try {
        run_simulation(cfg, (dir / "run").string(), 10, sink);
        FAIL("expected refusal");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("GUARD-FAIL") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(dir / "run" / "ticks.csv"));

    const auto path = write_config(cfg, dir, "low_gamma.ini");
    const Cli v = cli("validate -c " + path.string(), dir);
    CHECK(v.code == 2);
    CHECK(v.out.find("GUARD-FAIL") != std::string::npos);
    const Cli r = cli("run -c " + path.string() + " -o " + (dir / "cli_run").string() + " -t 5", dir);
    CHECK(r.code == 2);
    CHECK(r.out.find("GUARD-FAIL") != std::string::npos);

    PhysicsParams zero;
    zero.gamma = 0.0;
    CHECK_FALSE(validate_params(zero, 36, {0.5, 0.5, 0.5, 0.5}).ok);
    std::string text = render_config(cfg);
    text.replace(text.find("gamma = 0.5"), 11, "gamma = 0");
    std::ofstream(dir / "zero_gamma.ini") << text;
    CHECK(cli("validate -c " + (dir / "zero_gamma.ini").string(), dir).code == 2);
}

TEST_CASE("shipped default config validates") {
    const auto dir = test::scratch_dir("default");
    const Cli v = cli("validate -c " + test::source_path("configs/default.ini"), dir);
    CHECK(v.code == 0);
    CHECK(v.out.find("ok") != std::string::npos);
    CHECK(v.out.find("GUARD-FAIL") == std::string::npos);
}

TEST_CASE("missing corpus and unwritable output") {
    const auto dir = test::scratch_dir("io");
    SimConfig cfg = small_config();
    cfg.streams.corpus_path = "/nonexistent/mee-corpus.txt";
    const auto path = write_config(cfg, dir, "nocorpus.ini");
    const Cli v = cli("validate -c " + path.string(), dir);
    CHECK(v.code == 3);
    CHECK(v.out.find("/nonexistent/mee-corpus.txt") != std::string::npos);

    CHECK_THROWS_AS(run_simulation(small_config(), "/proc/mee-cannot-write/run", 1, sink), IoError);
    const auto good = write_config(small_config(), dir, "good.ini");
    CHECK(cli("run -c " + good.string() + " -o /proc/mee-cannot-write/run -t 1", dir).code == 3);
    CHECK(cli("run -c " + (dir / "absent.ini").string() + " -o " + (dir / "x").string() + " -t 1", dir).code != 0);
}

TEST_CASE("analyze a single run") {
    const auto dir = test::scratch_dir("analyze1");
    run_simulation(small_config(), (dir / "run").string(), 80, sink);
    const Cli a = cli("analyze " + (dir / "run").string(), dir);
    REQUIRE(a.code == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "run" / "report.json"));
    for (const char* key : {"prediction_1_specialization", "prediction_2_noise_avoidance", "prediction_3_trophic_levels",
                            "prediction_5_complexity", "prediction_6_efficiency"})
        CHECK(report.contains(key));
    CHECK(report.at("prediction_4_path_divergence") == "requires >= 2 runs");
    CHECK(report.at("runs").at(0).at("collapsed") == false);
    CHECK(fs::exists(dir / "run" / "series.csv"));

    fs::remove(dir / "run" / "ledger.csv");
    CHECK(cli("analyze " + (dir / "run").string(), dir).code != 0);
    CHECK_THROWS_AS(analyze_runs({(dir / "run").string()}, (dir / "out").string()), IoError);
}

TEST_CASE("identical runs have equal inter and intra divergence") {
    const auto dir = test::scratch_dir("analyze2");
    run_simulation(small_config(4), (dir / "a").string(), 40, sink);
    run_simulation(small_config(4), (dir / "b").string(), 40, sink);
    const auto report = analyze_runs({(dir / "a").string(), (dir / "b").string()}, (dir / "out").string());
    const auto& pair = report.at("prediction_4_path_divergence").at(0);
    CHECK(pair.at("inter").get<double>() == pair.at("intra").get<double>());
}

TEST_CASE("a collapsed ecology is flagged") {
    const auto dir = test::scratch_dir("collapse");
    SimConfig cfg = small_config();
    cfg.physics.e_start = 3.0;
    cfg.physics.beta = 1.0;  // compute alone outruns any income
    const auto s = run_simulation(cfg, (dir / "run").string(), 20, sink);
    CHECK(s.collapsed);
    const auto report = analyze_runs({(dir / "run").string()}, (dir / "run").string());
    CHECK(report.at("runs").at(0).at("collapsed") == true);
    CHECK(report.at("runs").at(0).at("surviving_ticks").get<int>() < 20);
}
