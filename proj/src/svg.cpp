#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "homoflow/io.hpp"

namespace homoflow {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Bounds {
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
};

double nice_step(double span) {
    if (!(span > 0)) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double nice = 10.0;
    if (frac <= 1.0) nice = 1.0;
    else if (frac <= 2.0) nice = 2.0;
    else if (frac <= 5.0) nice = 5.0;
    return nice * mag;
}

std::string tick_label(double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

}  // namespace

std::optional<PlotSpec::Kind> PlotSpec::kind_from(std::string_view name) {
    if (name == "energy_vs_t") return Kind::EnergyVsT;
    if (name == "moment_vs_t") return Kind::MomentVsT;
    if (name == "worldlines") return Kind::Worldlines;
    if (name == "rescaled_worldlines") return Kind::RescaledWorldlines;
    if (name == "density_hist") return Kind::DensityHist;
    return std::nullopt;
}

const char* PlotSpec::kind_name(Kind k) {
    switch (k) {
        case Kind::EnergyVsT: return "energy_vs_t";
        case Kind::MomentVsT: return "moment_vs_t";
        case Kind::Worldlines: return "worldlines";
        case Kind::RescaledWorldlines: return "rescaled_worldlines";
        case Kind::DensityHist: return "density_hist";
    }
    return "?";
}

void render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec,
                const std::filesystem::path& path) {
    if (series.empty()) throw DomainError("render_svg: no series");
    if (spec.width <= 0 || spec.height <= 0) throw DomainError("render_svg: bad dimensions");

    // filter by time window and collect bounds
    std::vector<PlotSeries> data;
    for (const auto& s : series) {
        PlotSeries f;
        f.label = s.label;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (spec.t_range &&
                (s.x[i] < spec.t_range->first || s.x[i] > spec.t_range->second))
                continue;
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            f.x.push_back(s.x[i]);
            f.y.push_back(s.y[i]);
        }
        if (!f.x.empty()) data.push_back(std::move(f));
    }
    if (data.empty()) throw DomainError("render_svg: no data points in range");

    Bounds b{data[0].x[0], data[0].x[0], data[0].y[0], data[0].y[0]};
    for (const auto& s : data)
        for (size_t i = 0; i < s.x.size(); ++i) {
            b.xlo = std::min(b.xlo, s.x[i]);
            b.xhi = std::max(b.xhi, s.x[i]);
            b.ylo = std::min(b.ylo, s.y[i]);
            b.yhi = std::max(b.yhi, s.y[i]);
        }
    if (b.xhi == b.xlo) {
        b.xlo -= 0.5;
        b.xhi += 0.5;
    }
    if (b.yhi == b.ylo) {
        b.ylo -= 0.5;
        b.yhi += 0.5;
    }
    // 4% padding on y
    const double ypad = 0.04 * (b.yhi - b.ylo);
    b.ylo -= ypad;
    b.yhi += ypad;

    const double ml = 72, mr = 16, mt = 16, mb = 44;
    const double pw = spec.width - ml - mr;
    const double ph = spec.height - mt - mb;
    auto sx = [&](double x) { return ml + (x - b.xlo) / (b.xhi - b.xlo) * pw; };
    auto sy = [&](double y) { return mt + (b.yhi - y) / (b.yhi - b.ylo) * ph; };

    std::ostringstream out;
    out.precision(8);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << " "
        << spec.height << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" fill=\"white\"/>\n";

    // axes box
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // ticks
    const double xstep = nice_step(b.xhi - b.xlo);
    const double ystep = nice_step(b.yhi - b.ylo);
    out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (double x = std::ceil(b.xlo / xstep) * xstep; x <= b.xhi + 1e-9 * xstep; x += xstep) {
        const double px = sx(x);
        out << "<line x1=\"" << px << "\" y1=\"" << mt + ph << "\" x2=\"" << px << "\" y2=\""
            << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\">" << tick_label(x) << "</text>\n";
    }
    for (double y = std::ceil(b.ylo / ystep) * ystep; y <= b.yhi + 1e-9 * ystep; y += ystep) {
        const double py = sy(y);
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\""
            << py << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\">" << tick_label(y) << "</text>\n";
    }
    out << "</g>\n";

    if (spec.kind == PlotSpec::Kind::DensityHist) {
        // bars; bin width from consecutive centers
        const auto& s = data.front();
        const double w = s.x.size() > 1 ? (s.x[1] - s.x[0]) : 1.0;
        out << "<g fill=\"" << kPalette[0] << "\" fill-opacity=\"0.7\">\n";
        const double y0 = sy(std::max(0.0, b.ylo));
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double x0 = sx(s.x[i] - 0.5 * w);
            const double x1 = sx(s.x[i] + 0.5 * w);
            const double yt = sy(s.y[i]);
            out << "<rect x=\"" << x0 << "\" y=\"" << yt << "\" width=\"" << x1 - x0
                << "\" height=\"" << std::max(0.0, y0 - yt) << "\"/>\n";
        }
        out << "</g>\n";
    } else {
        int ci = 0;
        for (const auto& s : data) {
            out << "<polyline fill=\"none\" stroke=\"" << kPalette[ci % 8]
                << "\" stroke-width=\"1\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (i) out << ' ';
                out << sx(s.x[i]) << ',' << sy(s.y[i]);
            }
            out << "\"/>\n";
            ++ci;
        }
    }
    out << "</svg>\n";

    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open for writing: " + path.string());
    file << out.str();
    if (!file) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<PlotSeries> column_series(const TabledSeries& diag, const char* ycol,
                                      const char* label) {
    auto tc = diag.column("t");
    auto yc = diag.column(ycol);
    if (!tc || !yc)
        throw DomainError(std::string("input table lacks the required columns t and ") + ycol +
                          " (is this a diagnostics csv?)");
    PlotSeries s;
    s.label = label;
    for (const auto& row : diag.rows) {
        s.x.push_back(row[*tc]);
        s.y.push_back(row[*yc]);
    }
    if (s.x.empty()) throw DomainError("empty table");
    return {std::move(s)};
}

}  // namespace

std::vector<PlotSeries> plot_series_energy(const TabledSeries& diagnostics) {
    return column_series(diagnostics, "F", "F");
}

std::vector<PlotSeries> plot_series_moment(const TabledSeries& diagnostics) {
    return column_series(diagnostics, "f2", "f2");
}

std::vector<PlotSeries> plot_series_worldlines(const SnapshotSeries& snaps) {
    if (snaps.positions.empty()) throw DomainError("empty snapshot series");
    const size_t n = snaps.positions.front().size();
    std::vector<PlotSeries> out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i].label = "x" + std::to_string(i + 1);
        out[i].x = snaps.times;
        out[i].y.reserve(snaps.times.size());
        for (const auto& row : snaps.positions) out[i].y.push_back(row[i]);
    }
    return out;
}

std::vector<PlotSeries> plot_series_rescaled(
    const std::vector<std::pair<double, std::vector<double>>>& rescaled) {
    if (rescaled.empty()) throw DomainError("empty rescaled series");
    const size_t n = rescaled.front().second.size();
    std::vector<PlotSeries> out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i].label = "y" + std::to_string(i + 1);
        for (const auto& [t, row] : rescaled) {
            out[i].x.push_back(t);
            out[i].y.push_back(row[i]);
        }
    }
    return out;
}

std::vector<PlotSeries> plot_series_density_hist(const SnapshotSeries& snaps, int bins) {
    if (snaps.positions.empty()) throw DomainError("empty snapshot series");
    const auto& x = snaps.positions.back();
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double w = (hi - lo) / bins;
    PlotSeries s;
    s.label = "density";
    s.x.resize(static_cast<size_t>(bins));
    s.y.assign(static_cast<size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b) s.x[static_cast<size_t>(b)] = lo + (b + 0.5) * w;
    for (double v : x) {
        int b = static_cast<int>((v - lo) / w);
        b = std::clamp(b, 0, bins - 1);
        s.y[static_cast<size_t>(b)] += 1.0;
    }
    // equal-mass particles: counts -> probability density
    for (double& v : s.y) v /= static_cast<double>(x.size()) * w;
    return {std::move(s)};
}

}  // namespace homoflow
