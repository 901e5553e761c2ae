#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "homoflow/cli.hpp"
#include "homoflow/io.hpp"

using namespace homoflow;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"homoflow"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path temp_dir(const char* name) {
    auto dir = fs::temp_directory_path() / "homoflow_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

const char* kSmallConfig = R"(schema = 1
[model]
m = 1.2
chi = 0.11
alpha = 0
n = 5
[initial]
kind = uniform
half_width = 1
[time]
t_max = 1.0
dt_schedule = inf:0.05
)";

}  // namespace

TEST_CASE("help exits 0 on every subcommand") {
    CHECK(run({"--help"}) == 0);
    for (const char* sub :
         {"simulate", "threshold", "critical-profile", "analyze", "plot", "sweep"})
        CHECK(run({sub, "--help"}) == 0);
}

TEST_CASE("flag errors exit 2") {
    CHECK(run({"threshold", "--m", "1.2", "--p-max", "3", "--bogus"}) == 2);
    CHECK(run({"threshold"}) == 2);          // missing required flags
    CHECK(run({"no-such-subcommand"}) == 2);
    CHECK(run({}) == 2);                     // a subcommand is required
}

TEST_CASE("threshold subcommand writes the expected table") {
    const auto dir = temp_dir("threshold");
    const auto csv = (dir / "table.csv").string();
    CHECK(run({"threshold", "--m", "1.2", "--p-max", "3", "--csv", csv.c_str()}) == 0);

    const TabledSeries table = read_table_csv(csv);
    REQUIRE(table.rows.size() == 2);
    const size_t cp = *table.column("c_p");
    CHECK(table.rows[0][cp] == 0.5);
    CHECK(std::abs(table.rows[1][cp] - 0.348365) < 1e-5);
}

TEST_CASE("threshold output is deterministic for a fixed seed") {
    const auto dir = temp_dir("determinism");
    const auto a = (dir / "a.csv").string();
    const auto b = (dir / "b.csv").string();
    CHECK(run({"threshold", "--m", "1.3", "--p-max", "5", "--seed", "7", "--csv", a.c_str()}) == 0);
    CHECK(run({"threshold", "--m", "1.3", "--p-max", "5", "--seed", "7", "--csv", b.c_str()}) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("simulate: config errors exit 2, missing files exit 4, success exits 0") {
    const auto dir = temp_dir("simulate");
    const auto cfg = dir / "run.cfg";
    write_file(cfg, kSmallConfig);

    const auto out = (dir / "out").string();
    CHECK(run({"simulate", "--config", cfg.string().c_str(), "--out", out.c_str()}) == 0);
    CHECK(fs::exists(fs::path(out) / "diagnostics.csv"));
    CHECK(fs::exists(fs::path(out) / "snapshots.csv"));
    CHECK(fs::exists(fs::path(out) / "summary.json"));
    const std::string summary = slurp(fs::path(out) / "summary.json");
    CHECK(summary.find("\"type\": \"completed\"") != std::string::npos);
    CHECK(summary.find("\"c_n\":") != std::string::npos);

    // blow-up is a result, not an error
    std::string hot(kSmallConfig);
    hot.replace(hot.find("chi = 0.11"), std::strlen("chi = 0.11"), "chi = 0.60");
    hot.replace(hot.find("t_max = 1.0"), std::strlen("t_max = 1.0"), "t_max = 50");
    const auto hot_cfg = dir / "hot.cfg";
    write_file(hot_cfg, hot);
    const auto out2 = (dir / "out2").string();
    CHECK(run({"simulate", "--config", hot_cfg.string().c_str(), "--out", out2.c_str()}) == 0);
    CHECK(slurp(fs::path(out2) / "summary.json").find("\"type\": \"blowup\"") !=
          std::string::npos);

    // invalid config -> 2
    std::string broken(kSmallConfig);
    broken.replace(broken.find("chi = 0.11"), std::strlen("chi = 0.11"), "");
    const auto broken_cfg = dir / "broken.cfg";
    write_file(broken_cfg, broken);
    CHECK(run({"simulate", "--config", broken_cfg.string().c_str(), "--out", out.c_str()}) == 2);

    // unreadable config path -> 4
    CHECK(run({"simulate", "--config", (dir / "missing.cfg").string().c_str(), "--out",
               out.c_str()}) == 4);
}

TEST_CASE("simulate output is byte-identical across reruns") {
    const auto dir = temp_dir("sim_determinism");
    const auto cfg = dir / "run.cfg";
    write_file(cfg, kSmallConfig);
    const auto out1 = (dir / "o1").string();
    const auto out2 = (dir / "o2").string();
    CHECK(run({"simulate", "--config", cfg.string().c_str(), "--out", out1.c_str()}) == 0);
    CHECK(run({"simulate", "--config", cfg.string().c_str(), "--out", out2.c_str()}) == 0);
    CHECK(slurp(fs::path(out1) / "diagnostics.csv") == slurp(fs::path(out2) / "diagnostics.csv"));
    CHECK(slurp(fs::path(out1) / "snapshots.csv") == slurp(fs::path(out2) / "snapshots.csv"));
    CHECK(slurp(fs::path(out1) / "summary.json") == slurp(fs::path(out2) / "summary.json"));
}

TEST_CASE("critical-profile prints a found profile and tolerates empty regimes") {
    CHECK(run({"critical-profile", "--m", "1.2", "--p", "3"}) == 0);
    CHECK(run({"critical-profile", "--m", "1.2", "--p", "3", "--chi", "0.1"}) == 0);
    CHECK(run({"critical-profile", "--m", "0.9", "--p", "3"}) == 2);  // m must be > 1
}

TEST_CASE("analyze and plot run against simulated output") {
    const auto dir = temp_dir("analyze");
    const auto cfg = dir / "run.cfg";
    // a supercritical run that collapses quickly
    std::string hot(kSmallConfig);
    hot.replace(hot.find("chi = 0.11"), std::strlen("chi = 0.11"), "chi = 0.60");
    hot.replace(hot.find("t_max = 1.0"), std::strlen("t_max = 1.0"), "t_max = 50");
    write_file(cfg, hot);
    const auto out = (dir / "out").string();
    REQUIRE(run({"simulate", "--config", cfg.string().c_str(), "--out", out.c_str()}) == 0);

    const auto snaps = (fs::path(out) / "snapshots.csv").string();
    const auto report = (dir / "report.json").string();
    CHECK(run({"analyze", "--snapshots", snaps.c_str(), "--out", report.c_str()}) == 0);
    const std::string text = slurp(report);
    CHECK(text.find("relative_sets") != std::string::npos);
    CHECK(text.find("weak_sets") != std::string::npos);

    const auto diag = (fs::path(out) / "diagnostics.csv").string();
    const auto svg1 = (dir / "energy.svg").string();
    CHECK(run({"plot", "--snapshots", diag.c_str(), "--kind", "energy_vs_t", "--out",
               svg1.c_str()}) == 0);
    CHECK(testutil::xml_well_formed(slurp(svg1)));

    const auto svg2 = (dir / "world.svg").string();
    CHECK(run({"plot", "--snapshots", snaps.c_str(), "--kind", "worldlines", "--out",
               svg2.c_str()}) == 0);
    CHECK(testutil::xml_well_formed(slurp(svg2)));

    const auto svg3 = (dir / "hist.svg").string();
    CHECK(run({"plot", "--snapshots", snaps.c_str(), "--kind", "density_hist", "--out",
               svg3.c_str()}) == 0);
    CHECK(testutil::xml_well_formed(slurp(svg3)));

    // energy plot against a snapshots file is a usage error
    CHECK(run({"plot", "--snapshots", snaps.c_str(), "--kind", "energy_vs_t", "--out",
               svg1.c_str()}) == 2);
    CHECK(run({"plot", "--snapshots", diag.c_str(), "--kind", "no_such_kind", "--out",
               svg1.c_str()}) == 2);
}

TEST_CASE("the logarithmic model runs through the same surface") {
    const auto dir = temp_dir("log_model");
    const auto cfg = dir / "log.cfg";
    write_file(cfg, R"(schema = 1
[model]
m = 1
chi = 0.16
n = 5
[initial]
kind = uniform
[time]
t_max = 0.5
dt_schedule = inf:0.01
)");
    const auto out = (dir / "out").string();
    CHECK(run({"simulate", "--config", cfg.string().c_str(), "--out", out.c_str()}) == 0);
    CHECK(slurp(fs::path(out) / "summary.json").find("\"type\": \"completed\"") !=
          std::string::npos);
}

TEST_CASE("HOMOFLOW_JOBS provides the sweep default") {
    const auto dir = temp_dir("jobs_env");
    const auto cfg = dir / "run.cfg";
    write_file(cfg, kSmallConfig);
    setenv("HOMOFLOW_JOBS", "1", 1);
    const auto out = (dir / "out").string();
    CHECK(run({"sweep", "--config", cfg.string().c_str(), "--param", "chi", "--values",
               "0.11", "--out", out.c_str()}) == 0);
    unsetenv("HOMOFLOW_JOBS");
    CHECK(fs::exists(fs::path(out) / "phase.csv"));
}

TEST_CASE("sweep runs values in parallel and classifies phases") {
    const auto dir = temp_dir("sweep");
    const auto cfg = dir / "run.cfg";
    std::string base(kSmallConfig);
    base.replace(base.find("t_max = 1.0"), std::strlen("t_max = 1.0"), "t_max = 30");
    write_file(cfg, base);

    const auto out = (dir / "out").string();
    CHECK(run({"sweep", "--config", cfg.string().c_str(), "--param", "chi", "--values",
               "0.11,0.6", "--out", out.c_str(), "--jobs", "2"}) == 0);

    const std::string phase = slurp(fs::path(out) / "phase.csv");
    CHECK(phase.rfind("chi,termination,T_estimate,max_f2,t_max_f2\n", 0) == 0);
    CHECK(fs::exists(fs::path(out) / "summary_000.json"));
    CHECK(fs::exists(fs::path(out) / "summary_001.json"));

    // value order preserved; phases classified
    const size_t line1 = phase.find('\n') + 1;
    const size_t line2 = phase.find('\n', line1) + 1;
    CHECK(phase.substr(line1, 5) == "0.11,");
    CHECK(phase.substr(line2, 4) == "0.6,");
    CHECK(phase.find("completed") != std::string::npos);
    CHECK(phase.find("blowup") != std::string::npos);

    // only chi sweeps are supported
    CHECK(run({"sweep", "--config", cfg.string().c_str(), "--param", "m", "--values", "1.2",
               "--out", out.c_str()}) == 2);
}
