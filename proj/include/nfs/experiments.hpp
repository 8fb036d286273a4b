// experiments.hpp - scenario runner, sweeps and named presets
#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfs/config_io.hpp"
#include "nfs/errors.hpp"
#include "nfs/field_record.hpp"
#include "nfs/model.hpp"
#include "nfs/obe_solver.hpp"
#include "nfs/parallel.hpp"
#include "nfs/spectral.hpp"
#include "nfs/switching.hpp"

namespace nfs {

/// Default lower bound for node search: the incident pulse has passed.
inline double default_node_t_min(const ScenarioConfig& c) {
    return c.plan.node_t_min.value_or(c.pulse.t0 + 5.0 * c.pulse.tau);
}

/// Same configuration with all switching removed.
inline ScenarioConfig unperturbed(ScenarioConfig c) {
    for (auto& t : c.targets) t.schedule.switch_times.clear();
    c.plan = SchedulePlan{};
    return c;
}

inline FieldRecord simulate_field(const ScenarioConfig& c) {
    return run_chain(c.pulse, c.targets, c.constants, c.grid);
}

/// Temporal nodes of the unperturbed exit field for t in (t_min, t_horizon].
inline std::vector<double> unperturbed_nodes(const ScenarioConfig& c, double t_horizon) {
    auto u = unperturbed(c);
    const auto steps = static_cast<std::size_t>(std::ceil(std::min(t_horizon, c.grid.t_end) / c.grid.dt - 1e-9));
    u.grid.t_end = static_cast<double>(steps) * c.grid.dt;
    return detect_nodes(simulate_field(u), default_node_t_min(c));
}

/// First quantum-beat node of the unperturbed run. The search window covers a
/// few beat periods past the pulse.
inline double first_node(const ScenarioConfig& c) {
    double horizon = default_node_t_min(c) + 40.0;
    if (!c.targets.empty()) {
        const double delta = angular_detuning(c.targets.front().delta_over_gamma, c.constants);
        if (delta > 0.0) horizon = default_node_t_min(c) + 4.0 * std::numbers::pi / delta + 10.0;
    }
    const auto nodes = unperturbed_nodes(c, horizon);
    if (nodes.empty()) throw AnalysisError("no temporal node found in the unperturbed output");
    return nodes.front();
}

struct ResolvedScenario {
    ScenarioConfig config;  // plan expanded into explicit per-target schedules
    std::optional<double> t1;
    std::vector<std::string> notes;
};

/// Expands the schedule plan into explicit switch times.
inline ResolvedScenario resolve_schedules(const ScenarioConfig& in) {
    in.validate();
    ResolvedScenario r{in, std::nullopt, {}};
    auto& c = r.config;
    const auto& plan = in.plan;
    auto type_of = [](ScheduleKind k) {
        switch (k) {
            case ScheduleKind::simultaneous: return 1;
            case ScheduleKind::upstream_only: return 2;
            case ScheduleKind::downstream_only: return 3;
            case ScheduleKind::delayed: return 4;
            default: return 0;
        }
    };
    if (plan.kind == ScheduleKind::explicit_times) return r;
    if (plan.kind == ScheduleKind::nodes) {
        SwitchSchedule s{{}, plan.duration_d};
        if (plan.n_switches > 0) {
            if (!plan.iterative_nodes) {
                const auto nodes = unperturbed_nodes(in, in.grid.t_end);
                s = node_schedule(nodes, plan.n_switches, plan.duration_d);
            } else {
                // Re-detect after each added switch; the next switch goes to the
                // first usable node beyond the previous one.
                auto work = unperturbed(in);
                const double gap = SwitchSchedule::min_separation(plan.duration_d);
                for (int k = 0; k < plan.n_switches; ++k) {
                    const auto nodes = drop_close_pairs(detect_nodes(simulate_field(work), default_node_t_min(in)), gap);
                    const double after = s.switch_times.empty() ? (nodes.empty() ? 0.0 : nodes.front())
                                                                : s.switch_times.back();
                    std::optional<double> next;
                    for (double t : nodes)
                        if (t > after + gap) { next = t; break; }
                    if (!next) throw AnalysisError("iterative node schedule: ran out of nodes after " +
                                                   std::to_string(k) + " switches");
                    s.switch_times.push_back(*next);
                    for (auto& t : work.targets) t.schedule = s;
                }
            }
        }
        for (auto& t : c.targets) t.schedule = s;
        r.notes.push_back("nodes: " + std::to_string(s.switch_times.size()) + " switches" +
                          (s.empty() ? "" : ", last at " + std::to_string(s.switch_times.back()) + " ns"));
        return r;
    }
    const double t1 = plan.t1 ? *plan.t1 : first_node(in);
    r.t1 = t1;
    if (!plan.t1) r.notes.push_back("t1 placed at first unperturbed node " + std::to_string(t1) + " ns");
    auto [a, b] = make_type_schedules(type_of(plan.kind), t1, plan.tau_d, plan.duration_d);
    c.targets[0].schedule = a;
    if (c.targets.size() > 1) c.targets[1].schedule = b;
    return r;
}

struct SimulationResult {
    ResolvedScenario resolved;
    FieldRecord input;
    FieldRecord output;
    SpectrumRecord spectrum;
    std::vector<std::pair<std::pair<double, double>, PeakReport>> peaks;
    std::vector<std::string> diagnostics;
};

/// Resolves the plan, runs the target chain and evaluates the spectrum and peak windows.
inline SimulationResult simulate(const ScenarioConfig& config) {
    SimulationResult r;
    r.resolved = resolve_schedules(config);
    const auto& c = r.resolved.config;
    r.diagnostics = r.resolved.notes;
    r.input = gaussian_input(c.pulse, c.grid);
    r.output = simulate_field(c);
    const auto omega = c.spectrum.values();
    r.spectrum = normalized_spectrum(r.input, r.output, omega, c.constants.gamma);
    if (r.spectrum.truncation_warning)
        r.diagnostics.push_back("truncation: |Omega(t_end)| / max |Omega| = " + std::to_string(r.output.tail_ratio()));
    auto windows = c.spectrum.peak_windows;
    if (windows.empty()) windows.emplace_back(c.spectrum.omega_min, c.spectrum.omega_max);
    for (const auto& w : windows) {
        try {
            r.peaks.emplace_back(w, peak_metrics(r.spectrum, w.first, w.second));
        } catch (const AnalysisError& e) {
            r.diagnostics.push_back(e.what());
        }
    }
    return r;
}

namespace detail {

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot write '" + p.string() + "'");
    return os;
}

inline void close_out(std::ofstream& os, const std::filesystem::path& p) {
    os.close();
    if (!os) throw IoError("write failed for '" + p.string() + "'");
}

inline void make_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace detail

inline void write_field_csv(std::ostream& os, const FieldRecord& f, const std::string& hash) {
    os << "# config_hash=" << hash << "\n" << "t_ns,re_omega,im_omega\n";
    char buf[96];
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g\n", f.time(i), f.samples[i].real(), f.samples[i].imag());
        os << buf;
    }
}

inline nlohmann::json peak_json(const PeakReport& p) {
    return {{"center", p.center}, {"height", p.height}, {"fwhm", p.fwhm}};
}

struct RunManifest {
    std::string config_hash;
    std::string started;
    std::string finished;
    std::vector<std::string> files;
    std::vector<std::string> diagnostics;

    nlohmann::json to_json() const {
        return {{"config_hash", config_hash}, {"started", started}, {"finished", finished},
                {"files", files}, {"diagnostics", diagnostics}};
    }
};

/// Runs one scenario and writes field.csv, spectrum.csv, peaks.json and manifest.json.
inline RunManifest run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
    RunManifest m;
    m.started = detail::utc_now();
    m.config_hash = config_hash(config);
    const auto r = simulate(config);
    detail::make_dir(out_dir);

    const auto field_path = out_dir / "field.csv";
    auto fo = detail::open_out(field_path);
    write_field_csv(fo, r.output, m.config_hash);
    detail::close_out(fo, field_path);

    const auto spec_path = out_dir / "spectrum.csv";
    auto so = detail::open_out(spec_path);
    write_spectrum_csv(so, r.spectrum);
    detail::close_out(so, spec_path);

    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& [w, p] : r.peaks) {
        auto j = peak_json(p);
        j["window"] = {w.first, w.second};
        peaks.push_back(j);
    }
    const auto peaks_path = out_dir / "peaks.json";
    auto po = detail::open_out(peaks_path);
    po << peaks.dump(2) << "\n";
    detail::close_out(po, peaks_path);

    m.files = {field_path.string(), spec_path.string(), peaks_path.string()};
    m.diagnostics = r.diagnostics;
    for (std::size_t i = 0; i < r.resolved.config.targets.size(); ++i)
        m.diagnostics.push_back("target" + std::to_string(i + 1) + " switch_times = \"" +
                                detail::fmt_list(r.resolved.config.targets[i].schedule.switch_times) + "\"");
    m.finished = detail::utc_now();
    const auto man_path = out_dir / "manifest.json";
    auto mo = detail::open_out(man_path);
    mo << m.to_json().dump(2) << "\n";
    detail::close_out(mo, man_path);
    return m;
}

enum class SweepParameter { tau_d, delta_over_gamma, n_switches };

struct SweepSpec {
    SweepParameter parameter = SweepParameter::tau_d;
    std::vector<double> values;
    ScenarioConfig base;
};

/// "a,b,c" or "start:stop:step" (inclusive of stop within rounding).
inline std::vector<double> parse_sweep_values(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = detail::split(text, ':');
        if (parts.size() != 3) throw ConfigError("sweep values: expected start:stop:step");
        const double a = detail::parse_real(parts[0], "sweep start");
        const double b = detail::parse_real(parts[1], "sweep stop");
        const double h = detail::parse_real(parts[2], "sweep step");
        if (!(h > 0.0) || b < a) throw ConfigError("sweep values: need step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
    } else {
        for (const auto& p : detail::split(text, ',')) out.push_back(detail::parse_real(p, "sweep value"));
    }
    if (out.empty()) throw ConfigError("sweep values: empty list");
    return out;
}

inline SweepParameter parse_sweep_parameter(const std::string& s) {
    if (s == "tau_d") return SweepParameter::tau_d;
    if (s == "delta" || s == "delta_over_gamma") return SweepParameter::delta_over_gamma;
    if (s == "nswitch" || s == "n_switches") return SweepParameter::n_switches;
    throw ConfigError("unknown sweep parameter '" + s + "'");
}

struct SweepPoint {
    double value = 0.0;
    std::optional<SimulationResult> result;
    std::string error;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline void check_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw ConfigError("sweep: no values");
    spec.base.validate();
}

/// Runs one configuration per value in parallel; failures are kept per point.
template <class MakeConfig>
SweepResult run_points(const std::vector<double>& values, MakeConfig&& make) {
    SweepResult s;
    s.points.resize(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        auto& p = s.points[i];
        p.value = values[i];
        try {
            p.result = simulate(make(values[i]));
        } catch (const std::exception& e) {
            p.error = e.what();
        }
    });
    for (const auto& p : s.points)
        if (!p.error.empty()) s.diagnostics.push_back("value " + fmt_real(p.value) + ": " + p.error);
    return s;
}

inline void write_sweep_manifest(const std::filesystem::path& out_dir, const SweepSpec& spec,
                                 const std::vector<std::string>& files, const SweepResult& r,
                                 const std::string& started) {
    RunManifest m;
    m.config_hash = config_hash(spec.base);
    m.started = started;
    m.files = files;
    m.diagnostics = r.diagnostics;
    for (const auto& p : r.points)
        if (p.result)
            for (const auto& note : p.result->diagnostics)
                m.diagnostics.push_back("value " + fmt_real(p.value) + ": " + note);
    m.finished = utc_now();
    const auto path = out_dir / "manifest.json";
    auto os = open_out(path);
    os << m.to_json().dump(2) << "\n";
    close_out(os, path);
}

}  // namespace detail

/// One spectrum per tau_D value, assembled into spectrogram.csv (long format).
inline SweepResult sweep_tau_d(const SweepSpec& spec, const std::optional<std::filesystem::path>& out_dir = {}) {
    const auto started = detail::utc_now();
    detail::check_sweep(spec);
    if (spec.base.plan.kind != ScheduleKind::delayed)
        throw ConfigError("sweep tau_d: base scenario must use schedule type 4");
    ScenarioConfig base = spec.base;
    if (!base.plan.t1) base.plan.t1 = first_node(base);
    auto result = detail::run_points(spec.values, [&](double v) {
        ScenarioConfig c = base;
        c.plan.tau_d = v;
        return c;
    });
    if (out_dir) {
        detail::make_dir(*out_dir);
        std::vector<std::pair<double, SpectrumRecord>> rows;
        for (const auto& p : result.points)
            if (p.result) rows.emplace_back(p.value, p.result->spectrum);
        const auto path = *out_dir / "spectrogram.csv";
        auto os = detail::open_out(path);
        write_spectrogram_csv(os, assemble_spectrogram(rows));
        detail::close_out(os, path);
        detail::write_sweep_manifest(*out_dir, spec, {path.string()}, result, started);
    }
    return result;
}

struct DeltaSweepRow {
    double delta_over_gamma = 0.0;
    double max_s = std::numeric_limits<double>::quiet_NaN();
    double fwhm = std::numeric_limits<double>::quiet_NaN();
    double t1 = std::numeric_limits<double>::quiet_NaN();
    int type = 0;
};

/// Global maximum of S over omega > 0 with its FWHM (NaN if a crossing is missing).
inline PeakReport positive_branch_peak(const SpectrumRecord& s) {
    const double hi = s.omega_over_gamma.empty() ? 0.0 : s.omega_over_gamma.back();
    PeakReport best;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.omega_over_gamma[i] > 0.0 && s.s_values[i] > s.s_values[arg]) arg = i;
    best.center = s.omega_over_gamma[arg];
    best.height = s.s_values[arg];
    best.fwhm = std::numeric_limits<double>::quiet_NaN();
    try {
        best = peak_metrics(s, 1e-12, hi);
    } catch (const AnalysisError&) {
    }
    return best;
}

/// Max S and FWHM per Delta; the switch is placed at each Delta's first node.
inline std::vector<DeltaSweepRow> sweep_delta(const SweepSpec& spec,
                                              const std::optional<std::filesystem::path>& out_dir = {},
                                              SweepResult* raw = nullptr) {
    const auto started = detail::utc_now();
    detail::check_sweep(spec);
    int type = 0;
    switch (spec.base.plan.kind) {
        case ScheduleKind::simultaneous: type = 1; break;
        case ScheduleKind::upstream_only: type = 2; break;
        case ScheduleKind::downstream_only: type = 3; break;
        default: throw ConfigError("sweep delta: base scenario must use schedule type 1, 2 or 3");
    }
    auto result = detail::run_points(spec.values, [&](double v) {
        ScenarioConfig c = spec.base;
        for (auto& t : c.targets) t.delta_over_gamma = v;
        c.plan.t1.reset();
        return c;
    });
    std::vector<DeltaSweepRow> rows;
    for (const auto& p : result.points) {
        DeltaSweepRow row;
        row.delta_over_gamma = p.value;
        row.type = type;
        if (p.result) {
            const auto peak = positive_branch_peak(p.result->spectrum);
            row.max_s = peak.height;
            row.fwhm = peak.fwhm;
            row.t1 = p.result->resolved.t1.value_or(row.t1);
        }
        rows.push_back(row);
    }
    if (out_dir) {
        detail::make_dir(*out_dir);
        const auto path = *out_dir / "delta_sweep.csv";
        auto os = detail::open_out(path);
        os << "delta_over_gamma,max_s,fwhm,type,t1_ns\n";
        char buf[128];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%d,%.10g\n", r.delta_over_gamma, r.max_s, r.fwhm,
                          r.type, r.t1);
            os << buf;
        }
        detail::close_out(os, path);
        detail::write_sweep_manifest(*out_dir, spec, {path.string()}, result, started);
    }
    if (raw) *raw = std::move(result);
    return rows;
}

struct SwitchCountRow {
    int n_switches = 0;
    double s0 = std::numeric_limits<double>::quiet_NaN();
    double last_switch = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

/// S(0) against the number N of node switches applied to both targets. All
/// switch times must lie within `window_ns`.
inline std::vector<SwitchCountRow> sweep_switch_count(const SweepSpec& spec,
                                                      const std::optional<std::filesystem::path>& out_dir = {},
                                                      double window_ns = 300.0) {
    const auto started = detail::utc_now();
    detail::check_sweep(spec);
    const auto nodes = unperturbed_nodes(spec.base, spec.base.grid.t_end);
    const double d = spec.base.plan.duration_d;
    std::vector<SwitchCountRow> rows(spec.values.size());
    std::vector<ScenarioConfig> configs(spec.values.size());
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        rows[i].n_switches = static_cast<int>(std::lround(spec.values[i]));
        configs[i] = spec.base;
        configs[i].plan = SchedulePlan{};
        try {
            const auto s = node_schedule(nodes, rows[i].n_switches, d);
            if (!s.empty()) {
                rows[i].last_switch = s.switch_times.back();
                if (s.switch_times.back() > window_ns)
                    throw AnalysisError("switch at " + std::to_string(s.switch_times.back()) +
                                        " ns lies beyond the " + std::to_string(window_ns) + " ns window");
            }
            for (auto& t : configs[i].targets) t.schedule = s;
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    }
    SweepResult result;
    result.points.resize(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        result.points[i].value = spec.values[i];
        if (!rows[i].error.empty()) return;
        try {
            auto c = configs[i];
            const auto input = gaussian_input(c.pulse, c.grid);
            const auto out = simulate_field(c);
            const double zero = 0.0;
            rows[i].s0 = normalized_spectrum(input, out, std::span<const double>(&zero, 1), c.constants.gamma).s_values[0];
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    });
    for (const auto& r : rows)
        if (!r.error.empty()) result.diagnostics.push_back("N = " + std::to_string(r.n_switches) + ": " + r.error);
    if (out_dir) {
        detail::make_dir(*out_dir);
        const auto path = *out_dir / "switch_count.csv";
        auto os = detail::open_out(path);
        os << "n_switches,s0,last_switch_ns\n";
        char buf[96];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", r.n_switches, r.s0, r.last_switch);
            os << buf;
        }
        detail::close_out(os, path);
        detail::write_sweep_manifest(*out_dir, spec, {path.string()}, result, started);
    }
    return rows;
}

/// Per-omega spread max - min of S across the rows of a spectrogram.
inline std::vector<double> modulation_depth(const Spectrogram& g) {
    std::vector<double> depth(g.omega_over_gamma.size(), 0.0);
    if (g.s.empty()) return depth;
    for (std::size_t c = 0; c < depth.size(); ++c) {
        double lo = g.s[0][c], hi = g.s[0][c];
        for (const auto& row : g.s) {
            lo = std::min(lo, row[c]);
            hi = std::max(hi, row[c]);
        }
        depth[c] = hi - lo;
    }
    return depth;
}

// Named scenarios. The same text ships as presets/<name>.ini.
inline const std::map<std::string, std::string>& preset_texts() {
    static const std::map<std::string, std::string> presets = {
        {"fig2-single", R"([target1]
xi = 15
delta_over_gamma = 80
[target2]
xi = 15
delta_over_gamma = 80
[schedule]
schedule_type = 1
t1 = auto
)"},
        {"fig2-fifty", R"([target1]
xi = 15
delta_over_gamma = 80
[target2]
xi = 15
delta_over_gamma = 80
[spectrum]
peak_windows = "-20:20, 140:180"
[schedule]
schedule_type = nodes
n_switches = 50
)"},
        {"fig3-type1", R"([target1]
xi = 30
delta_over_gamma = 80
[target2]
xi = 30
delta_over_gamma = 80
[schedule]
schedule_type = 1
t1 = 3.12
)"},
        {"fig3-type2", R"([target1]
xi = 30
delta_over_gamma = 80
[target2]
xi = 30
delta_over_gamma = 80
[schedule]
schedule_type = 2
t1 = 3.12
)"},
        {"fig3-type3", R"([target1]
xi = 30
delta_over_gamma = 80
[target2]
xi = 30
delta_over_gamma = 80
[spectrum]
peak_windows = "60:80, 80:100"
[schedule]
schedule_type = 3
t1 = 3.12
)"},
        {"fig4-scan", R"([target1]
xi = 15
delta_over_gamma = 80
[target2]
xi = 15
delta_over_gamma = 80
[spectrum]
peak_windows = "60:81, 81:100"
[schedule]
schedule_type = 4
t1 = 3.28
tau_d = 4.2
)"},
        {"fig4-thin", R"([target1]
xi = 5
delta_over_gamma = 80
[target2]
xi = 5
delta_over_gamma = 80
[spectrum]
omega_min = 60
omega_max = 100
[schedule]
schedule_type = 4
t1 = auto
tau_d = 0
)"},
        {"fig5-scan", R"([target1]
xi = 15
delta_over_gamma = 5
[target2]
xi = 15
delta_over_gamma = 5
[spectrum]
omega_min = -40
omega_max = 40
peak_windows = "-10:10"
[schedule]
schedule_type = 4
t1 = 16.4
tau_d = -7
)"},
    };
    return presets;
}

inline ScenarioConfig preset(const std::string& name) {
    const auto& p = preset_texts();
    const auto it = p.find(name);
    if (it == p.end()) throw ConfigError("unknown preset '" + name + "'");
    return parse_config(it->second);
}

}  // namespace nfs
