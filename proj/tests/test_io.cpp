#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "homoflow/flow.hpp"
#include "homoflow/io.hpp"

using namespace homoflow;
namespace fs = std::filesystem;

namespace {

const char* kReferenceConfig = R"(# reference two-peak run
schema = 1

[model]
m = 1.2
chi = 1.45
alpha = 0
n = 200

[initial]
kind = tanh
amplitude = 4
steepness = 10
center_p = 0.5

[time]
t_max = 500
dt_schedule = 4.0:0.05, inf:0.5
)";

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "homoflow_io_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

RunSpec random_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RunSpec spec;
    spec.params.m = 1.0 + u(rng);
    spec.params.chi = 0.01 + u(rng);
    spec.params.alpha = u(rng) < 0.5 ? 0.0 : u(rng);
    spec.params.n = 2 + static_cast<int>(u(rng) * 20);
    spec.initial.n = spec.params.n;
    switch (static_cast<int>(u(rng) * 4)) {
        case 0:
            spec.initial.kind = InitialProfile::Kind::Tanh;
            spec.initial.amplitude = 1.0 + u(rng);
            spec.initial.steepness = 1.0 + 10 * u(rng);
            spec.initial.center_p = 0.3 + 0.4 * u(rng);
            break;
        case 1:
            spec.initial.kind = InitialProfile::Kind::Uniform;
            spec.initial.half_width = 0.5 + u(rng);
            break;
        case 2:
            spec.initial.kind = InitialProfile::Kind::TwoBlocks;
            spec.initial.separation = 1.0 + u(rng);
            spec.initial.block_width = 0.5 + u(rng);
            break;
        default: {
            spec.initial.kind = InitialProfile::Kind::Explicit;
            spec.initial.positions.clear();
            double x = -u(rng) * 5;
            for (int i = 0; i < spec.params.n; ++i) {
                spec.initial.positions.push_back(x);
                x += 0.1 + u(rng);
            }
            break;
        }
    }
    spec.dt_schedule.clear();
    double t = 0;
    const int phases = 1 + static_cast<int>(u(rng) * 3);
    for (int k = 0; k < phases; ++k) {
        t += u(rng) * 10;
        spec.dt_schedule.push_back({t, 0.001 + u(rng)});
    }
    spec.dt_schedule.push_back({std::numeric_limits<double>::infinity(), 0.5});
    spec.t_max = 1.0 + 100 * u(rng);
    spec.newton.max_iters = 10 + static_cast<int>(u(rng) * 90);
    spec.newton.tol = std::pow(10.0, -6 - 6 * u(rng));
    spec.newton.damping = u(rng) < 0.5;
    if (u(rng) < 0.5) spec.stop.gap_min = std::pow(10.0, -12 + 4 * u(rng));
    spec.stop.dt_min = std::pow(10.0, -12 + 2 * u(rng));
    spec.record_every = 1 + static_cast<int>(u(rng) * 10);
    return spec;
}

}  // namespace

TEST_CASE("reference config parses with every value in place") {
    const RunSpec spec = parse_run_spec(kReferenceConfig);
    CHECK(spec.params.m == 1.2);
    CHECK(spec.params.chi == 1.45);
    CHECK(spec.params.n == 200);
    CHECK(spec.initial.kind == InitialProfile::Kind::Tanh);
    CHECK(spec.initial.amplitude == 4.0);
    CHECK(spec.initial.steepness == 10.0);
    REQUIRE(spec.dt_schedule.size() == 2);
    CHECK(spec.dt_schedule[0].t_until == 4.0);
    CHECK(spec.dt_schedule[0].dt == 0.05);
    CHECK(std::isinf(spec.dt_schedule[1].t_until));
    CHECK(spec.dt_schedule[1].dt == 0.5);
    // defaults
    CHECK(spec.newton.max_iters == 50);
    CHECK(spec.newton.tol == 1e-10);
    CHECK(spec.newton.damping);
    CHECK(!spec.stop.gap_min.has_value());
    CHECK(spec.stop.dt_min == 1e-10);
    CHECK(spec.record_every == 1);
}

TEST_CASE("config validation errors name the offending key") {
    std::string text(kReferenceConfig);
    // missing chi
    std::string no_chi = text;
    no_chi.replace(no_chi.find("chi = 1.45"), std::strlen("chi = 1.45"), "");
    try {
        parse_run_spec(no_chi);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.key == "model.chi");
    }

    // negative dt
    std::string bad_dt = text;
    bad_dt.replace(bad_dt.find("4.0:0.05"), std::strlen("4.0:0.05"), "4.0:-1");
    CHECK_THROWS_AS(parse_run_spec(bad_dt), ValidationError);

    // reopening a section merges it; duplicate keys are rejected
    CHECK_NOTHROW(parse_run_spec(text + "\n[model]\n"));
    CHECK_THROWS_AS(parse_run_spec(text + "\n[model]\nm = 1.3\n"), ValidationError);
    // unknown section / key
    CHECK_THROWS_AS(parse_run_spec(text + "\n[extra]\nfoo = 1\n"), ValidationError);
    std::string unknown = text + "\n[stop]\nbogus = 2\n";
    try {
        parse_run_spec(unknown);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.key == "stop.bogus");
    }

    // schema gate
    std::string bad_schema = text;
    bad_schema.replace(bad_schema.find("schema = 1"), std::strlen("schema = 1"), "schema = 2");
    CHECK_THROWS_AS(parse_run_spec(bad_schema), ValidationError);

    // parse errors carry line/column
    try {
        parse_run_spec("schema = 1\n[model\nm = 1.2\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    try {
        parse_run_spec("schema = 1\n\nnot a key value\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("config round-trip: parse(render(spec)) == spec") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 60; ++rep) {
        const RunSpec spec = random_spec(rng);
        const RunSpec back = parse_run_spec(render_run_spec(spec));
        CHECK(back == spec);
    }
}

TEST_CASE("double formatting round-trips bit-exactly") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 10000) {
        std::uint64_t b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        const double back = parse_double(format_double(v));
        std::uint64_t b2;
        std::memcpy(&b2, &back, sizeof back);
        CHECK(b2 == b);
        ++checked;
    }
    CHECK(parse_double("inf") == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("trajectory csv: exact headers and bit-exact snapshot round-trip") {
    const auto dir = temp_dir();
    RunSpec spec;
    spec.params = {1.2, 0.11, 0.0, 5};
    spec.initial.kind = InitialProfile::Kind::Uniform;
    spec.initial.n = 5;
    spec.dt_schedule = {{std::numeric_limits<double>::infinity(), 0.05}};
    spec.t_max = 2.0;
    const auto result = simulate(spec);

    write_trajectory_csv(result, dir / "diag.csv", dir / "snaps.csv");

    const std::string diag_text = slurp(dir / "diag.csv");
    CHECK(diag_text.rfind("t,dt,F,U,W,f2,fmp1,min_gap,H,newton_iters\n", 0) == 0);
    CHECK(diag_text.find("\r") == std::string::npos);

    const std::string snap_text = slurp(dir / "snaps.csv");
    CHECK(snap_text.rfind("t,x1,x2,x3,x4,x5\n", 0) == 0);

    const SnapshotSeries series = read_snapshots_csv(dir / "snaps.csv");
    REQUIRE(series.times.size() == result.snapshots.size());
    for (size_t k = 0; k < series.times.size(); ++k) {
        CHECK(series.times[k] == result.snapshots[k].first);
        for (int i = 0; i < 5; ++i)
            CHECK(series.positions[k][static_cast<size_t>(i)] ==
                  result.snapshots[k].second[i]);
    }

    // diagnostics table reads back with named columns; F is non-increasing
    const TabledSeries table = read_table_csv(dir / "diag.csv");
    REQUIRE(table.column("F").has_value());
    const size_t fc = *table.column("F");
    for (size_t k = 0; k + 1 < table.rows.size(); ++k)
        CHECK(table.rows[k + 1][fc] <=
              table.rows[k][fc] + 1e-9 * std::max(1.0, std::abs(table.rows[k][fc])));
}

TEST_CASE("empty trajectory writes header-only files") {
    const auto dir = temp_dir();
    SimulationResult empty;
    write_trajectory_csv(empty, dir / "e_diag.csv", dir / "e_snaps.csv");
    CHECK(slurp(dir / "e_diag.csv") == "t,dt,F,U,W,f2,fmp1,min_gap,H,newton_iters\n");
    CHECK(slurp(dir / "e_snaps.csv") == "t\n");
}

TEST_CASE("summary json fields") {
    const auto dir = temp_dir();
    RunSpec spec;
    spec.params = {1.2, 0.11, 0.0, 4};
    spec.initial.kind = InitialProfile::Kind::Uniform;
    spec.initial.n = 4;
    spec.dt_schedule = {{std::numeric_limits<double>::infinity(), 0.05}};
    spec.t_max = 1.0;
    const auto result = simulate(spec);
    REQUIRE(result.termination.kind == TerminationKind::Completed);

    SummaryContext ctx;
    ctx.c_n = 0.269994;
    write_summary_json(result, spec, ctx, dir / "summary.json");
    const std::string text = slurp(dir / "summary.json");
    CHECK(text.find("\"type\": \"completed\"") != std::string::npos);
    CHECK(text.find("\"c_n\": 0.269994") != std::string::npos);
    CHECK(text.find("t_of_max_f2") != std::string::npos);

    // negative initial energy: the sign-change time is the first row, t = 0
    RunSpec hot = spec;
    hot.params.chi = 0.5;  // far supercritical
    hot.t_max = 0.2;
    hot.stop.dt_min = 1e-12;
    const auto blown = simulate(hot);
    write_summary_json(blown, hot, SummaryContext{}, dir / "summary2.json");
    const std::string text2 = slurp(dir / "summary2.json");
    CHECK(text2.find("\"t_energy_sign_change\": 0.0") != std::string::npos);
}

TEST_CASE("svg output: structure, well-formedness, monotone energy polyline") {
    const auto dir = temp_dir();

    TabledSeries diag;
    diag.columns = {"t", "F"};
    diag.rows = {{0.0, 5.0}, {1.0, 3.0}};
    PlotSpec spec;
    spec.kind = PlotSpec::Kind::EnergyVsT;
    render_svg(plot_series_energy(diag), spec, dir / "energy.svg");
    const std::string svg = slurp(dir / "energy.svg");
    CHECK(testutil::xml_well_formed(svg));

    // exactly one polyline with exactly two points
    size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++count;
        pos += 9;
    }
    CHECK(count == 1);
    const size_t pts = svg.find("points=\"");
    REQUIRE(pts != std::string::npos);
    const std::string point_list = svg.substr(pts + 8, svg.find('"', pts + 8) - pts - 8);
    CHECK(std::count(point_list.begin(), point_list.end(), ',') == 2);

    // y pixels non-decreasing (svg y grows downward, energy falls)
    {
        std::vector<double> ys;
        std::istringstream ss(point_list);
        std::string pair;
        while (ss >> pair) ys.push_back(std::stod(pair.substr(pair.find(',') + 1)));
        REQUIRE(ys.size() == 2);
        CHECK(ys[1] >= ys[0]);
    }

    // worldlines: one polyline per particle
    SnapshotSeries snaps;
    snaps.times = {0.0, 1.0, 2.0};
    snaps.positions = {{-1.0, 1.0}, {-0.9, 0.9}, {-0.8, 0.8}};
    PlotSpec wspec;
    wspec.kind = PlotSpec::Kind::Worldlines;
    render_svg(plot_series_worldlines(snaps), wspec, dir / "world.svg");
    const std::string wsvg = slurp(dir / "world.svg");
    CHECK(testutil::xml_well_formed(wsvg));
    count = 0;
    pos = 0;
    while ((pos = wsvg.find("<polyline", pos)) != std::string::npos) {
        ++count;
        pos += 9;
    }
    CHECK(count == 2);

    // histogram renders rects and stays well-formed
    PlotSpec hspec;
    hspec.kind = PlotSpec::Kind::DensityHist;
    render_svg(plot_series_density_hist(snaps, 8), hspec, dir / "hist.svg");
    CHECK(testutil::xml_well_formed(slurp(dir / "hist.svg")));

    CHECK_THROWS_AS(render_svg({}, spec, dir / "none.svg"), DomainError);
}

TEST_CASE("initial profiles materialize centered and ordered") {
    for (auto kind : {InitialProfile::Kind::Tanh, InitialProfile::Kind::Uniform,
                      InitialProfile::Kind::TwoBlocks}) {
        InitialProfile prof;
        prof.kind = kind;
        prof.n = 31;
        const auto x = make_initial(prof);
        CHECK(x.size() == 31);
        CHECK(kernels::strictly_increasing(x.positions()));
        double sum = 0;
        for (double v : x.positions()) sum += v;
        CHECK(std::abs(sum) <= 1e-12 * std::max(1.0, x.scale()));
    }

    InitialProfile bad;
    bad.kind = InitialProfile::Kind::Explicit;
    bad.n = 3;
    bad.positions = {0.0, 1.0};  // wrong length
    CHECK_THROWS_AS(make_initial(bad), std::invalid_argument);
}
