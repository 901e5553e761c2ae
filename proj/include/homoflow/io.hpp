#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "homoflow/blowup.hpp"
#include "homoflow/flow.hpp"

namespace homoflow {

struct ParseError : std::runtime_error {
    int line;
    int col;
    ParseError(int line_, int col_, const std::string& what_);
};

struct ValidationError : std::runtime_error {
    std::string key;
    ValidationError(std::string key_, const std::string& what_);
};

// Flat sectioned key = value format; sections [model], [initial], [time],
// [newton], [stop], [output]; `schema = 1` before the first section.
// Unknown keys are rejected. Full schema documented in the README.
RunSpec parse_run_spec(std::string_view text);
std::string render_run_spec(const RunSpec& spec);

// Diagnostics CSV with exact header t,dt,F,U,W,f2,fmp1,min_gap,H,newton_iters
// and snapshots CSV with header t,x1,...,xN. Doubles use shortest round-trip
// formatting, '.' decimals, '\n' line endings.
void write_trajectory_csv(const SimulationResult& result,
                          const std::filesystem::path& diagnostics_csv,
                          const std::filesystem::path& snapshots_csv);

struct SummaryContext {
    std::optional<double> c_n;
    const std::vector<BlowUpSet>* blowup_sets = nullptr;
};

void write_summary_json(const SimulationResult& result, const RunSpec& spec,
                        const SummaryContext& ctx, const std::filesystem::path& path);

struct SnapshotSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> positions;
};
SnapshotSeries read_snapshots_csv(const std::filesystem::path& path);

struct TabledSeries {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::optional<std::size_t> column(std::string_view name) const;
};
TabledSeries read_table_csv(const std::filesystem::path& path);

// Number formatting used across every writer: shortest representation that
// round-trips (std::to_chars), so parse(write(x)) == x bit-exactly.
std::string format_double(double v);
double parse_double(std::string_view s);  // throws on trailing garbage

struct PlotSpec {
    enum class Kind { EnergyVsT, MomentVsT, Worldlines, RescaledWorldlines, DensityHist };
    Kind kind = Kind::EnergyVsT;
    std::optional<std::pair<double, double>> t_range;
    int width = 900;
    int height = 600;

    static std::optional<Kind> kind_from(std::string_view name);
    static const char* kind_name(Kind k);
};

// One named polyline (or histogram bar series) in data coordinates.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Standalone SVG 1.1: linear axes with tick labels, one polyline per series
// (bars for histograms). Throws DomainError on empty data.
void render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec,
                const std::filesystem::path& path);

// Adapters from results to plottable series.
std::vector<PlotSeries> plot_series_energy(const TabledSeries& diagnostics);
std::vector<PlotSeries> plot_series_moment(const TabledSeries& diagnostics);
std::vector<PlotSeries> plot_series_worldlines(const SnapshotSeries& snaps);
std::vector<PlotSeries> plot_series_rescaled(
    const std::vector<std::pair<double, std::vector<double>>>& rescaled);
std::vector<PlotSeries> plot_series_density_hist(const SnapshotSeries& snaps, int bins = 40);

}  // namespace homoflow
