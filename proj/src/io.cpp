#include "homoflow/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace homoflow {

using nlohmann::json;

ParseError::ParseError(int line_, int col_, const std::string& what_)
    : std::runtime_error("parse error at line " + std::to_string(line_) + ", col " +
                         std::to_string(col_) + ": " + what_),
      line(line_),
      col(col_) {}

ValidationError::ValidationError(std::string key_, const std::string& what_)
    : std::runtime_error("invalid config key '" + key_ + "': " + what_), key(std::move(key_)) {}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

namespace {

struct Entry {
    std::string value;
    int line;
    int col;
    bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

Sections tokenize(std::string_view text) {
    Sections sections;
    std::string current;  // "" = before any section (schema key lives here)
    int lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view raw = text.substr(pos, eol - pos);
        ++lineno;

        std::string_view line = raw;
        if (size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        std::string_view t = trim(line);
        if (!t.empty()) {
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ParseError(lineno, static_cast<int>(raw.find('[')) + 1,
                                     "unterminated section header");
                current = std::string(trim(t.substr(1, t.size() - 2)));
                if (current.empty()) throw ParseError(lineno, 1, "empty section name");
            } else {
                size_t eq = t.find('=');
                if (eq == std::string_view::npos)
                    throw ParseError(lineno, 1, "expected 'key = value'");
                std::string key(trim(t.substr(0, eq)));
                std::string value(trim(t.substr(eq + 1)));
                if (key.empty()) throw ParseError(lineno, 1, "empty key");
                const int col = static_cast<int>(raw.find(key)) + 1;
                if (value.empty())
                    throw ParseError(lineno, static_cast<int>(raw.find('=')) + 2, "empty value");
                auto& sec = sections[current];
                if (sec.count(key))
                    throw ValidationError(current.empty() ? key : current + "." + key,
                                          "duplicate key");
                sec[key] = Entry{value, lineno, col};
            }
        }
        if (eol == text.size()) break;
        pos = eol + 1;
    }
    return sections;
}

class SpecReader {
  public:
    explicit SpecReader(Sections sections) : sections_(std::move(sections)) {}

    std::optional<std::string> raw(const std::string& sec, const std::string& key) {
        auto s = sections_.find(sec);
        if (s == sections_.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        k->second.used = true;
        return k->second.value;
    }

    double number(const std::string& sec, const std::string& key, double fallback) {
        auto v = raw(sec, key);
        if (!v) return fallback;
        return parse_number(sec, key, *v);
    }

    double required_number(const std::string& sec, const std::string& key) {
        auto v = raw(sec, key);
        if (!v) throw ValidationError(sec + "." + key, "required key is missing");
        return parse_number(sec, key, *v);
    }

    int integer(const std::string& sec, const std::string& key, int fallback) {
        auto v = raw(sec, key);
        if (!v) return fallback;
        const double d = parse_number(sec, key, *v);
        if (d != std::floor(d) || std::abs(d) > 1e9)
            throw ValidationError(sec + "." + key, "expected an integer");
        return static_cast<int>(d);
    }

    int required_integer(const std::string& sec, const std::string& key) {
        auto v = raw(sec, key);
        if (!v) throw ValidationError(sec + "." + key, "required key is missing");
        const double d = parse_number(sec, key, *v);
        if (d != std::floor(d) || std::abs(d) > 1e9)
            throw ValidationError(sec + "." + key, "expected an integer");
        return static_cast<int>(d);
    }

    bool boolean(const std::string& sec, const std::string& key, bool fallback) {
        auto v = raw(sec, key);
        if (!v) return fallback;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw ValidationError(sec + "." + key, "expected true or false");
    }

    std::optional<std::string> optional_string(const std::string& sec, const std::string& key) {
        return raw(sec, key);
    }

    void reject_unknown() const {
        for (const auto& [sec, keys] : sections_)
            for (const auto& [key, entry] : keys)
                if (!entry.used)
                    throw ValidationError(sec.empty() ? key : sec + "." + key, "unknown key");
    }

  private:
    double parse_number(const std::string& sec, const std::string& key, const std::string& v) {
        try {
            return parse_double(v);
        } catch (const std::exception& e) {
            throw ValidationError(sec + "." + key, e.what());
        }
    }
    Sections sections_;
};

std::vector<SchedulePhase> parse_schedule(const std::string& text) {
    std::vector<SchedulePhase> phases;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string_view item = trim(std::string_view(text).substr(pos, comma - pos));
        if (!item.empty()) {
            size_t colon = item.find(':');
            if (colon == std::string_view::npos)
                throw ValidationError("time.dt_schedule", "expected 't_until:dt' pairs");
            SchedulePhase ph{};
            ph.t_until = parse_double(trim(item.substr(0, colon)));
            ph.dt = parse_double(trim(item.substr(colon + 1)));
            phases.push_back(ph);
        }
        pos = comma + 1;
    }
    if (phases.empty()) throw ValidationError("time.dt_schedule", "empty schedule");
    return phases;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
    std::vector<double> values;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string_view item = trim(std::string_view(text).substr(pos, comma - pos));
        if (!item.empty()) {
            try {
                values.push_back(parse_double(item));
            } catch (const std::exception& e) {
                throw ValidationError(key, e.what());
            }
        }
        pos = comma + 1;
    }
    return values;
}

void write_positive(const std::string& key, double v) {
    if (!(v > 0)) throw ValidationError(key, "must be > 0");
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

}  // namespace

RunSpec parse_run_spec(std::string_view text) {
    SpecReader reader(tokenize(text));

    const int schema = reader.required_integer("", "schema");
    if (schema != 1) throw ValidationError("schema", "unsupported schema version");

    RunSpec spec;
    spec.params.m = reader.required_number("model", "m");
    spec.params.chi = reader.required_number("model", "chi");
    spec.params.alpha = reader.number("model", "alpha", 0.0);
    spec.params.n = reader.required_integer("model", "n");
    if (spec.params.n < 2) throw ValidationError("model.n", "must be >= 2");
    if (!(spec.params.m >= 1.0)) throw ValidationError("model.m", "must be >= 1");
    write_positive("model.chi", spec.params.chi);

    auto kind = reader.optional_string("initial", "kind");
    if (!kind) throw ValidationError("initial.kind", "required key is missing");
    spec.initial.n = spec.params.n;
    if (auto dup = reader.optional_string("initial", "n")) {
        if (parse_double(*dup) != spec.params.n)
            throw ValidationError("initial.n", "must equal model.n when given");
    }
    if (*kind == "tanh") {
        spec.initial.kind = InitialProfile::Kind::Tanh;
        spec.initial.amplitude = reader.number("initial", "amplitude", 4.0);
        spec.initial.steepness = reader.number("initial", "steepness", 10.0);
        spec.initial.center_p = reader.number("initial", "center_p", 0.5);
    } else if (*kind == "uniform") {
        spec.initial.kind = InitialProfile::Kind::Uniform;
        spec.initial.half_width = reader.number("initial", "half_width", 1.0);
    } else if (*kind == "two_blocks") {
        spec.initial.kind = InitialProfile::Kind::TwoBlocks;
        spec.initial.separation = reader.number("initial", "separation", 4.0);
        spec.initial.block_width = reader.number("initial", "block_width", 1.0);
    } else if (*kind == "explicit") {
        spec.initial.kind = InitialProfile::Kind::Explicit;
        auto positions = reader.optional_string("initial", "positions");
        if (!positions) throw ValidationError("initial.positions", "required for kind = explicit");
        spec.initial.positions = parse_number_list(*positions, "initial.positions");
    } else {
        throw ValidationError("initial.kind",
                              "expected one of tanh, uniform, two_blocks, explicit");
    }

    spec.t_max = reader.required_number("time", "t_max");
    write_positive("time.t_max", spec.t_max);
    auto sched = reader.optional_string("time", "dt_schedule");
    if (!sched) throw ValidationError("time.dt_schedule", "required key is missing");
    spec.dt_schedule = parse_schedule(*sched);
    for (const auto& ph : spec.dt_schedule) write_positive("time.dt_schedule", ph.dt);

    spec.newton.max_iters = reader.integer("newton", "max_iters", 50);
    spec.newton.tol = reader.number("newton", "tol", 1e-10);
    spec.newton.damping = reader.boolean("newton", "damping", true);

    if (auto g = reader.optional_string("stop", "gap_min")) spec.stop.gap_min = parse_double(*g);
    spec.stop.dt_min = reader.number("stop", "dt_min", 1e-10);

    spec.record_every = reader.integer("output", "record_every", 1);

    reader.reject_unknown();

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError("runspec", e.what());
    }
    return spec;
}

std::string render_run_spec(const RunSpec& spec) {
    std::ostringstream out;
    out << "schema = 1\n\n";
    out << "[model]\n";
    out << "m = " << format_double(spec.params.m) << "\n";
    out << "chi = " << format_double(spec.params.chi) << "\n";
    out << "alpha = " << format_double(spec.params.alpha) << "\n";
    out << "n = " << spec.params.n << "\n\n";

    out << "[initial]\n";
    out << "kind = " << to_string(spec.initial.kind) << "\n";
    switch (spec.initial.kind) {
        case InitialProfile::Kind::Tanh:
            out << "amplitude = " << format_double(spec.initial.amplitude) << "\n";
            out << "steepness = " << format_double(spec.initial.steepness) << "\n";
            out << "center_p = " << format_double(spec.initial.center_p) << "\n";
            break;
        case InitialProfile::Kind::Uniform:
            out << "half_width = " << format_double(spec.initial.half_width) << "\n";
            break;
        case InitialProfile::Kind::TwoBlocks:
            out << "separation = " << format_double(spec.initial.separation) << "\n";
            out << "block_width = " << format_double(spec.initial.block_width) << "\n";
            break;
        case InitialProfile::Kind::Explicit: {
            out << "positions = ";
            for (size_t i = 0; i < spec.initial.positions.size(); ++i) {
                if (i) out << ", ";
                out << format_double(spec.initial.positions[i]);
            }
            out << "\n";
            break;
        }
    }
    out << "\n[time]\n";
    out << "t_max = " << format_double(spec.t_max) << "\n";
    out << "dt_schedule = ";
    for (size_t i = 0; i < spec.dt_schedule.size(); ++i) {
        if (i) out << ", ";
        out << format_double(spec.dt_schedule[i].t_until) << ":"
            << format_double(spec.dt_schedule[i].dt);
    }
    out << "\n\n[newton]\n";
    out << "max_iters = " << spec.newton.max_iters << "\n";
    out << "tol = " << format_double(spec.newton.tol) << "\n";
    out << "damping = " << (spec.newton.damping ? "true" : "false") << "\n";
    out << "\n[stop]\n";
    if (spec.stop.gap_min) out << "gap_min = " << format_double(*spec.stop.gap_min) << "\n";
    out << "dt_min = " << format_double(spec.stop.dt_min) << "\n";
    out << "\n[output]\n";
    out << "record_every = " << spec.record_every << "\n";
    return out.str();
}

void write_trajectory_csv(const SimulationResult& result,
                          const std::filesystem::path& diagnostics_csv,
                          const std::filesystem::path& snapshots_csv) {
    {
        std::ofstream out = open_out(diagnostics_csv);
        out << "t,dt,F,U,W,f2,fmp1,min_gap,H,newton_iters\n";
        for (const auto& r : result.rows) {
            out << format_double(r.t) << ',' << format_double(r.dt) << ','
                << format_double(r.total_energy) << ',' << format_double(r.internal) << ','
                << format_double(r.interaction) << ',' << format_double(r.f2) << ','
                << format_double(r.fmp1) << ',' << format_double(r.min_gap) << ','
                << format_double(r.deficit) << ',' << r.newton_iters << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + diagnostics_csv.string());
    }
    {
        std::ofstream out = open_out(snapshots_csv);
        out << 't';
        const int n = result.snapshots.empty() ? 0 : result.snapshots.front().second.size();
        for (int i = 1; i <= n; ++i) out << ",x" << i;
        out << '\n';
        for (const auto& [t, cfg] : result.snapshots) {
            out << format_double(t);
            for (double v : cfg.positions()) out << ',' << format_double(v);
            out << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + snapshots_csv.string());
    }
}

void write_summary_json(const SimulationResult& result, const RunSpec& spec,
                        const SummaryContext& ctx, const std::filesystem::path& path) {
    json j;
    j["schema"] = 1;
    j["params"] = {{"m", spec.params.m},
                   {"chi", spec.params.chi},
                   {"alpha", spec.params.alpha},
                   {"n", spec.params.n}};

    const char* type = "completed";
    if (result.termination.kind == TerminationKind::BlowUp) type = "blowup";
    if (result.termination.kind == TerminationKind::Failure) type = "failure";
    j["termination"] = {{"type", type},
                        {"t_estimate", result.termination.t_estimate},
                        {"last_dt", result.termination.last_dt},
                        {"min_gap", result.termination.min_gap}};
    if (!result.termination.reason.empty())
        j["termination"]["reason"] = result.termination.reason;
    if (std::isfinite(result.maximal_time_estimate))
        j["maximal_time_estimate"] = result.maximal_time_estimate;
    else
        j["maximal_time_estimate"] = nullptr;

    double max_f2 = -std::numeric_limits<double>::infinity();
    double t_max_f2 = 0.0;
    std::optional<double> t_sign_change;
    for (const auto& r : result.rows) {
        if (r.f2 > max_f2) {
            max_f2 = r.f2;
            t_max_f2 = r.t;
        }
        if (!t_sign_change && r.total_energy < 0.0) t_sign_change = r.t;
    }
    j["extrema"] = {{"t_of_max_f2", t_max_f2}, {"max_f2", max_f2}};
    j["extrema"]["t_energy_sign_change"] =
        t_sign_change ? json(*t_sign_change) : json(nullptr);

    j["c_n"] = ctx.c_n ? json(*ctx.c_n) : json(nullptr);

    if (ctx.blowup_sets) {
        json sets = json::array();
        for (const auto& s : *ctx.blowup_sets) {
            json js = {{"l", s.l},
                       {"r", s.r},
                       {"j_set", s.j_set},
                       {"boundary", s.boundary},
                       {"profile", s.profile.vec()},
                       {"profile_converged", s.profile_converged},
                       {"profile_oscillation", s.profile_oscillation},
                       {"eps_ratio", s.eps_ratio_used},
                       {"eps_abs", s.eps_abs_used}};
            sets.push_back(std::move(js));
        }
        j["blowup_sets"] = std::move(sets);
    }

    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    size_t pos = 0;
    while (true) {
        size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            cells.push_back(std::string(trim(std::string_view(line).substr(pos))));
            break;
        }
        cells.push_back(std::string(trim(std::string_view(line).substr(pos, comma - pos))));
        pos = comma + 1;
    }
    return cells;
}

}  // namespace

TabledSeries read_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    TabledSeries out;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path.string());
    out.columns = split_csv_line(line);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != out.columns.size())
            throw std::runtime_error("ragged csv row in " + path.string());
        std::vector<double> row(cells.size());
        for (size_t i = 0; i < cells.size(); ++i) row[i] = parse_double(cells[i]);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::optional<std::size_t> TabledSeries::column(std::string_view name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    return std::nullopt;
}

SnapshotSeries read_snapshots_csv(const std::filesystem::path& path) {
    TabledSeries table = read_table_csv(path);
    if (table.columns.empty() || table.columns.front() != "t")
        throw std::runtime_error("not a snapshots csv (missing t column): " + path.string());
    SnapshotSeries out;
    for (auto& row : table.rows) {
        out.times.push_back(row.front());
        out.positions.emplace_back(row.begin() + 1, row.end());
    }
    return out;
}

}  // namespace homoflow
