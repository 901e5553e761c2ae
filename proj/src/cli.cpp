#include "homoflow/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "homoflow/blowup.hpp"
#include "homoflow/io.hpp"
#include "homoflow/model.hpp"
#include "homoflow/thresholds.hpp"

namespace homoflow {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::pair<double, Configuration>> to_snapshots(const SnapshotSeries& series) {
    std::vector<std::pair<double, Configuration>> snaps;
    snaps.reserve(series.times.size());
    for (size_t i = 0; i < series.times.size(); ++i)
        snaps.emplace_back(series.times[i], center(series.positions[i]));
    return snaps;
}

nlohmann::json set_to_json(const BlowUpSet& s) {
    return {{"l", s.l},
            {"r", s.r},
            {"j_set", s.j_set},
            {"boundary", s.boundary},
            {"profile", s.profile.vec()},
            {"profile_converged", s.profile_converged},
            {"profile_oscillation", s.profile_oscillation},
            {"eps_ratio", s.eps_ratio_used},
            {"eps_abs", s.eps_abs_used}};
}

int default_jobs(size_t n_tasks) {
    if (const char* env = std::getenv("HOMOFLOW_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<int>(v);
    }
    const unsigned hc = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<int>(std::min<size_t>(hc, std::max<size_t>(1, n_tasks)));
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 1;
    bool force_threshold = false;
    bool skip_threshold = false;
};

int do_simulate(const SimulateArgs& args) {
    const RunSpec spec = parse_run_spec(read_file(args.config));
    const SimulationResult result =
        spec.params.m == 1.0 ? simulate_log(spec) : simulate(spec);

    SummaryContext ctx;
    const bool want_threshold =
        !args.skip_threshold && spec.params.m > 1.0 &&
        (args.force_threshold || spec.params.n <= 32);
    ThresholdOptions topts;
    topts.seed = args.seed;
    if (want_threshold) ctx.c_n = compute_threshold(spec.params.n, spec.params.m, topts).c_p;

    std::vector<BlowUpSet> sets;
    if (result.termination.kind == TerminationKind::BlowUp &&
        static_cast<int>(result.snapshots.size()) >= BlowUpOptions{}.tail) {
        sets = detect_relative_blowup(result.snapshots, BlowUpOptions{});
        ctx.blowup_sets = &sets;
    }

    std::filesystem::create_directories(args.out);
    const std::filesystem::path dir(args.out);
    write_trajectory_csv(result, dir / "diagnostics.csv", dir / "snapshots.csv");
    write_summary_json(result, spec, ctx, dir / "summary.json");

    const char* kind = result.termination.kind == TerminationKind::Completed ? "completed"
                       : result.termination.kind == TerminationKind::BlowUp  ? "blowup"
                                                                             : "failure";
    std::printf("termination: %s  t = %.6g  rows = %zu\n", kind,
                result.termination.t_estimate, result.rows.size());
    return result.termination.kind == TerminationKind::Failure ? kExitNumerical : kExitOk;
}

struct ThresholdArgs {
    double m = 1.2;
    int p_max = 8;
    std::string csv;
    std::uint64_t seed = 1;
    int starts = 16;
};

int do_threshold(const ThresholdArgs& args) {
    ThresholdOptions opts;
    opts.seed = args.seed;
    opts.starts = args.starts;
    const auto table = threshold_table(args.p_max, args.m, opts);
    std::printf("%4s %18s %18s %12s %14s\n", "p", "C_p", "max_ratio", "kkt", "mirror_defect");
    for (const auto& e : table)
        std::printf("%4d %18.12f %18.12f %12.3e %14.3e\n", e.p, e.c_p, e.ratio_value,
                    e.kkt_residual, e.mirror_defect);
    if (!args.csv.empty()) {
        std::ofstream out(args.csv, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + args.csv);
        out << "p,c_p,ratio,kkt_residual,mirror_defect\n";
        for (const auto& e : table)
            out << e.p << ',' << format_double(e.c_p) << ',' << format_double(e.ratio_value)
                << ',' << format_double(e.kkt_residual) << ','
                << format_double(e.mirror_defect) << '\n';
    }
    return kExitOk;
}

struct ProfileArgs {
    double m = 1.2;
    int p = 3;
    double chi = -1.0;  // default: C_p
    double alpha = 0.0;
    std::uint64_t seed = 1;
};

int do_profile(const ProfileArgs& args) {
    double chi = args.chi;
    if (chi <= 0) {
        ThresholdOptions topts;
        topts.seed = args.seed;
        chi = compute_threshold(args.p, args.m, topts).c_p;
        std::printf("chi defaulted to C_%d = %.12g\n", args.p, chi);
    }
    ProfileOptions opts;
    opts.seed = args.seed;
    const CriticalProfile prof = critical_profile(args.p, args.m, chi, args.alpha, opts);
    if (prof.status == ProfileStatus::NoCriticalPoint) {
        std::printf("no critical point found (best residual %.3e) — expected when the "
                    "(chi, alpha) regime admits none\n",
                    prof.residual);
        return kExitOk;
    }
    std::printf("critical profile: p = %d, chi = %.12g, alpha = %.12g\n", prof.p, prof.chi,
                prof.alpha);
    std::printf("residual = %.3e, F_m(V) = %.12g\n", prof.residual, prof.energy);
    for (int i = 0; i < prof.positions.size(); ++i)
        std::printf("V_%d = %.15g\n", i + 1, prof.positions[i]);
    return kExitOk;
}

struct AnalyzeArgs {
    std::string snapshots;
    double eps_ratio = 0.05;
    double eps_abs = -1.0;
    double gap_tol = -1.0;
    int tail = 8;
    std::string out;
};

int do_analyze(const AnalyzeArgs& args) {
    const SnapshotSeries series = read_snapshots_csv(args.snapshots);
    const auto snaps = to_snapshots(series);
    if (snaps.empty()) throw std::runtime_error("no snapshots in " + args.snapshots);

    BlowUpOptions opts;
    opts.eps_ratio = args.eps_ratio;
    opts.tail = args.tail;
    if (args.eps_abs > 0) opts.eps_abs = args.eps_abs;
    const auto sets = detect_relative_blowup(snaps, opts);

    SimulationResult shell;
    shell.snapshots = snaps;
    const double scale0 = snaps.front().second.scale();
    const double gap_tol = args.gap_tol > 0 ? args.gap_tol : 1e-5 * scale0;
    const auto weak = detect_weak_blowup(shell, gap_tol);

    nlohmann::json j;
    j["snapshots"] = snaps.size();
    j["t_end"] = snaps.back().first;
    j["eps_ratio"] = opts.eps_ratio;
    j["eps_abs"] = opts.eps_abs.value_or(1e-6 * scale0);
    j["tail"] = opts.tail;
    j["gap_tol"] = gap_tol;
    j["relative_sets"] = nlohmann::json::array();
    for (const auto& s : sets) j["relative_sets"].push_back(set_to_json(s));
    j["weak_sets"] = nlohmann::json::array();
    for (const auto& [l, r] : weak.sets)
        j["weak_sets"].push_back({{"l", l}, {"r", r}});

    const std::string text = j.dump(2) + "\n";
    if (args.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream out(args.out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + args.out);
        out << text;
    }
    return kExitOk;
}

struct PlotArgs {
    std::string snapshots;
    std::string kind = "energy_vs_t";
    std::string out;
    int width = 900;
    int height = 600;
    double t_min = std::numeric_limits<double>::quiet_NaN();
    double t_max = std::numeric_limits<double>::quiet_NaN();
    int bins = 40;
    double eps_ratio = 0.05;
    double eps_abs = -1.0;
    int tail = 8;
};

int do_plot(const PlotArgs& args) {
    auto kind = PlotSpec::kind_from(args.kind);
    if (!kind) throw ValidationError("kind", "unknown plot kind '" + args.kind + "'");
    PlotSpec spec;
    spec.kind = *kind;
    spec.width = args.width;
    spec.height = args.height;
    if (!std::isnan(args.t_min) && !std::isnan(args.t_max))
        spec.t_range = {args.t_min, args.t_max};

    std::vector<PlotSeries> series;
    switch (spec.kind) {
        case PlotSpec::Kind::EnergyVsT:
            series = plot_series_energy(read_table_csv(args.snapshots));
            break;
        case PlotSpec::Kind::MomentVsT:
            series = plot_series_moment(read_table_csv(args.snapshots));
            break;
        case PlotSpec::Kind::Worldlines:
            series = plot_series_worldlines(read_snapshots_csv(args.snapshots));
            break;
        case PlotSpec::Kind::DensityHist:
            series = plot_series_density_hist(read_snapshots_csv(args.snapshots), args.bins);
            break;
        case PlotSpec::Kind::RescaledWorldlines: {
            const auto snaps = to_snapshots(read_snapshots_csv(args.snapshots));
            BlowUpOptions bopts;
            bopts.eps_ratio = args.eps_ratio;
            bopts.tail = args.tail;
            if (args.eps_abs > 0) bopts.eps_abs = args.eps_abs;
            const auto sets = detect_relative_blowup(snaps, bopts);
            if (sets.empty())
                throw DomainError("rescaled_worldlines: no relative blow-up set detected");
            series = plot_series_rescaled(rescale_trajectory(snaps, sets[0].l, sets[0].r));
            break;
        }
    }
    render_svg(series, spec, args.out);
    std::printf("wrote %s\n", args.out.c_str());
    return kExitOk;
}

struct SweepArgs {
    std::string config;
    std::string param = "chi";
    std::string values;
    std::string out;
    int jobs = 0;
    std::uint64_t seed = 1;
};

int do_sweep(const SweepArgs& args) {
    if (args.param != "chi")
        throw ValidationError("param", "only 'chi' sweeps are supported");
    const RunSpec base = parse_run_spec(read_file(args.config));
    std::vector<double> values;
    {
        std::istringstream ss(args.values);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            values.push_back(parse_double(item));
        }
    }
    if (values.empty()) throw ValidationError("values", "no values given");
    for (double v : values)
        if (!(v > 0)) throw ValidationError("values", "chi values must be > 0");

    std::filesystem::create_directories(args.out);
    const std::filesystem::path dir(args.out);

    struct Row {
        double chi;
        SimulationResult result;
        RunSpec spec;
    };
    std::vector<Row> rows(values.size());
    std::atomic<size_t> next{0};
    const int jobs = args.jobs > 0 ? args.jobs : default_jobs(values.size());

    auto worker = [&]() {
        while (true) {
            const size_t k = next.fetch_add(1);
            if (k >= values.size()) break;
            RunSpec spec = base;
            spec.params.chi = values[k];
            rows[k].chi = values[k];
            rows[k].spec = spec;
            rows[k].result = spec.params.m == 1.0 ? simulate_log(spec) : simulate(spec);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ofstream phase(dir / "phase.csv", std::ios::binary);
    if (!phase) throw std::runtime_error("cannot open phase.csv for writing");
    phase << "chi,termination,T_estimate,max_f2,t_max_f2\n";
    bool any_failure = false;
    for (size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        double max_f2 = -std::numeric_limits<double>::infinity();
        double t_max_f2 = 0;
        for (const auto& row : r.result.rows)
            if (row.f2 > max_f2) {
                max_f2 = row.f2;
                t_max_f2 = row.t;
            }
        const char* kind = r.result.termination.kind == TerminationKind::Completed ? "completed"
                           : r.result.termination.kind == TerminationKind::BlowUp ? "blowup"
                                                                                  : "failure";
        if (r.result.termination.kind == TerminationKind::Failure) any_failure = true;
        phase << format_double(r.chi) << ',' << kind << ','
              << format_double(r.result.termination.t_estimate) << ','
              << format_double(max_f2) << ',' << format_double(t_max_f2) << '\n';

        char name[64];
        std::snprintf(name, sizeof(name), "summary_%03zu.json", k);
        write_summary_json(r.result, r.spec, SummaryContext{}, dir / name);
    }
    std::printf("swept %zu values with %d jobs -> %s\n", values.size(), jobs,
                args.out.c_str());
    return any_failure ? kExitNumerical : kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"homoflow: gradient flows of discrete homogeneous free energies — "
                 "simulation, critical thresholds, blow-up analysis"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sub_sim = app.add_subcommand("simulate", "run a configured simulation");
    sub_sim->add_option("--config", sim.config, "run configuration file")->required();
    sub_sim->add_option("--out", sim.out, "output directory")->required();
    sub_sim->add_option("--seed", sim.seed, "seed for randomized threshold starts");
    sub_sim->add_flag("--threshold", sim.force_threshold,
                      "compute C_N context even for large N");
    sub_sim->add_flag("--no-threshold", sim.skip_threshold, "skip the C_N context");

    ThresholdArgs thr;
    auto* sub_thr = app.add_subcommand("threshold", "print the C_p table");
    sub_thr->add_option("--m", thr.m, "diffusion exponent (> 1)")->required();
    sub_thr->add_option("--p-max", thr.p_max, "largest particle count")->required();
    sub_thr->add_option("--csv", thr.csv, "also write the table as CSV");
    sub_thr->add_option("--seed", thr.seed, "seed for randomized starts");
    sub_thr->add_option("--starts", thr.starts, "multi-start count (default 16)");

    ProfileArgs prof;
    auto* sub_prof = app.add_subcommand("critical-profile", "solve the critical-point equations");
    sub_prof->add_option("--m", prof.m, "diffusion exponent (> 1)")->required();
    sub_prof->add_option("--p", prof.p, "particle count")->required();
    sub_prof->add_option("--chi", prof.chi, "interaction coefficient (default: C_p)");
    sub_prof->add_option("--alpha", prof.alpha, "confinement coefficient (default 0)");
    sub_prof->add_option("--seed", prof.seed, "seed for randomized starts");

    AnalyzeArgs ana;
    auto* sub_ana = app.add_subcommand("analyze", "blow-up set detection on a trajectory");
    sub_ana->add_option("--snapshots", ana.snapshots, "snapshots CSV (t,x1,...,xN)")->required();
    sub_ana->add_option("--eps-ratio", ana.eps_ratio, "boundary ratio threshold (default 0.05)");
    sub_ana->add_option("--eps-abs", ana.eps_abs, "absolute gap threshold (default 1e-6*scale)");
    sub_ana->add_option("--gap-tol", ana.gap_tol, "weak blow-up gap tolerance (default 1e-5*scale)");
    sub_ana->add_option("--tail", ana.tail, "tail length for the limit statistics (default 8)");
    sub_ana->add_option("--out", ana.out, "write the JSON report here instead of stdout");

    PlotArgs plot;
    auto* sub_plot = app.add_subcommand("plot", "render an SVG plot");
    sub_plot->add_option("--snapshots", plot.snapshots,
                         "input CSV (snapshots file; diagnostics file for energy/moment kinds)")
        ->required();
    sub_plot->add_option("--kind", plot.kind,
                         "energy_vs_t | moment_vs_t | worldlines | rescaled_worldlines | density_hist")
        ->required();
    sub_plot->add_option("--out", plot.out, "output SVG path")->required();
    sub_plot->add_option("--width", plot.width, "pixel width (default 900)");
    sub_plot->add_option("--height", plot.height, "pixel height (default 600)");
    sub_plot->add_option("--t-min", plot.t_min, "time window start");
    sub_plot->add_option("--t-max", plot.t_max, "time window end");
    sub_plot->add_option("--bins", plot.bins, "histogram bins (default 40)");
    sub_plot->add_option("--eps-ratio", plot.eps_ratio,
                         "blow-up detection ratio threshold for rescaled_worldlines");
    sub_plot->add_option("--eps-abs", plot.eps_abs,
                         "blow-up detection gap threshold for rescaled_worldlines");
    sub_plot->add_option("--tail", plot.tail, "detection tail length (default 8)");

    SweepArgs sweep;
    auto* sub_sweep = app.add_subcommand("sweep", "run independent simulations over chi values");
    sub_sweep->add_option("--config", sweep.config, "base configuration file")->required();
    sub_sweep->add_option("--param", sweep.param, "swept parameter (chi)")->required();
    sub_sweep->add_option("--values", sweep.values, "comma-separated values")->required();
    sub_sweep->add_option("--out", sweep.out, "output directory")->required();
    sub_sweep->add_option("--jobs", sweep.jobs, "parallel runs (default: HOMOFLOW_JOBS or cores)");
    sub_sweep->add_option("--seed", sweep.seed, "seed for randomized starts");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sub_sim->parsed()) return do_simulate(sim);
        if (sub_thr->parsed()) return do_threshold(thr);
        if (sub_prof->parsed()) return do_profile(prof);
        if (sub_ana->parsed()) return do_analyze(ana);
        if (sub_plot->parsed()) return do_plot(plot);
        if (sub_sweep->parsed()) return do_sweep(sweep);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const NumericalOverflow& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    }
    return kExitConfig;
}

}  // namespace homoflow
