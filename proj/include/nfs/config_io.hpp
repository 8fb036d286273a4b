// config_io.hpp - flat sectioned key/value scenario files
//
//   [pulse]    t0, tau
//   [grid]     dt, t_end, n_slabs
//   [target1]  xi, thickness_L, delta_over_gamma, include_electronic,
//   [target2]  switch_times (comma separated), duration_d
//   [spectrum] omega_min, omega_max, omega_step, peak_windows ("lo:hi, lo:hi")
//   [schedule] schedule_type (explicit|1|2|3|4|nodes), t1 (number|auto), tau_d,
//              n_switches, duration_d, node_t_min (number|auto), iterative_nodes
//   [constants] gamma, cg_a, k_xray, n_real, n_imag
//
// Lines starting with '#' or ';' are comments. Unknown sections or keys are errors.
#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nfs/errors.hpp"
#include "nfs/model.hpp"

namespace nfs {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(sep, start);
        const auto end = pos == std::string_view::npos ? s.size() : pos;
        auto piece = trim(s.substr(start, end - start));
        if (!piece.empty()) parts.push_back(std::move(piece));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

inline double parse_real(const std::string& v, const std::string& where) {
    double out = 0.0;
    const auto* first = v.data();
    const auto* last = v.data() + v.size();
    if (!v.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || !std::isfinite(out))
        throw ConfigError(where + ": expected a real number, got '" + v + "'");
    return out;
}

inline int parse_int(const std::string& v, const std::string& where) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(where + ": expected an integer, got '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(where + ": expected a boolean, got '" + v + "'");
}

inline std::string fmt_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ", ";
        s += fmt_real(xs[i]);
    }
    return s;
}

using Sections = std::map<std::string, std::map<std::string, std::string>>;

// Drops a trailing "# ..." or "; ..." that follows whitespace outside quotes.
inline std::string_view strip_inline_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        else if (!quoted && (s[i] == '#' || s[i] == ';') && i > 0 && std::isspace(static_cast<unsigned char>(s[i - 1])))
            return s.substr(0, i);
    }
    return s;
}

inline Sections parse_sections(std::string_view text) {
    Sections out;
    std::string current;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            current = trim(std::string_view(t).substr(1, t.size() - 2));
            out[current];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (current.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside of any section");
        auto key = trim(std::string_view(t).substr(0, eq));
        auto value = trim(strip_inline_comment(std::string_view(t).substr(eq + 1)));
        out[current][key] = value;
    }
    return out;
}

inline ScheduleKind parse_kind(const std::string& v) {
    if (v == "explicit" || v == "none") return ScheduleKind::explicit_times;
    if (v == "1") return ScheduleKind::simultaneous;
    if (v == "2") return ScheduleKind::upstream_only;
    if (v == "3") return ScheduleKind::downstream_only;
    if (v == "4") return ScheduleKind::delayed;
    if (v == "nodes") return ScheduleKind::nodes;
    throw ConfigError("schedule: unknown schedule_type '" + v + "'");
}

inline std::string kind_name(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::explicit_times: return "explicit";
        case ScheduleKind::simultaneous: return "1";
        case ScheduleKind::upstream_only: return "2";
        case ScheduleKind::downstream_only: return "3";
        case ScheduleKind::delayed: return "4";
        case ScheduleKind::nodes: return "nodes";
    }
    return "explicit";
}

}  // namespace detail

/// Parses a scenario, starting from `base` (defaults unless a preset is layered).
inline ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {}) {
    using namespace detail;
    ScenarioConfig cfg = std::move(base);
    const auto sections = parse_sections(text);

    for (const auto& [name, kv] : sections) {
        auto where = [&](const std::string& key) { return "[" + name + "] " + key; };
        auto unknown = [&](const std::string& key) {
            throw ConfigError("unknown key '" + key + "' in section [" + name + "]");
        };
        if (name == "constants") {
            for (const auto& [k, v] : kv) {
                if (k == "gamma") cfg.constants.gamma = parse_real(v, where(k));
                else if (k == "cg_a") cfg.constants.cg_a = parse_real(v, where(k));
                else if (k == "k_xray") cfg.constants.k_xray = parse_real(v, where(k));
                else if (k == "n_real") cfg.constants.n_electronic.real(parse_real(v, where(k)));
                else if (k == "n_imag") cfg.constants.n_electronic.imag(parse_real(v, where(k)));
                else unknown(k);
            }
        } else if (name == "pulse") {
            for (const auto& [k, v] : kv) {
                if (k == "t0") cfg.pulse.t0 = parse_real(v, where(k));
                else if (k == "tau") cfg.pulse.tau = parse_real(v, where(k));
                else unknown(k);
            }
        } else if (name == "grid") {
            for (const auto& [k, v] : kv) {
                if (k == "dt") cfg.grid.dt = parse_real(v, where(k));
                else if (k == "t_end") cfg.grid.t_end = parse_real(v, where(k));
                else if (k == "n_slabs") cfg.grid.n_slabs = parse_int(v, where(k));
                else unknown(k);
            }
        } else if (name == "target1" || name == "target2") {
            const std::size_t idx = name == "target1" ? 0 : 1;
            if (cfg.targets.size() <= idx) cfg.targets.resize(idx + 1);
            auto& tg = cfg.targets[idx];
            for (const auto& [k, v] : kv) {
                if (k == "xi") tg.xi = parse_real(v, where(k));
                else if (k == "thickness_L") tg.thickness_L = parse_real(v, where(k));
                else if (k == "delta_over_gamma") tg.delta_over_gamma = parse_real(v, where(k));
                else if (k == "include_electronic") tg.include_electronic = parse_bool(v, where(k));
                else if (k == "duration_d") tg.schedule.duration_d = parse_real(v, where(k));
                else if (k == "switch_times") {
                    tg.schedule.switch_times.clear();
                    for (const auto& p : split(v, ','))
                        tg.schedule.switch_times.push_back(parse_real(p, where(k)));
                } else unknown(k);
            }
        } else if (name == "spectrum") {
            for (const auto& [k, v] : kv) {
                if (k == "omega_min") cfg.spectrum.omega_min = parse_real(v, where(k));
                else if (k == "omega_max") cfg.spectrum.omega_max = parse_real(v, where(k));
                else if (k == "omega_step") cfg.spectrum.omega_step = parse_real(v, where(k));
                else if (k == "peak_windows") {
                    cfg.spectrum.peak_windows.clear();
                    for (const auto& p : split(v, ',')) {
                        const auto lohi = split(p, ':');
                        if (lohi.size() != 2) throw ConfigError(where(k) + ": expected lo:hi");
                        cfg.spectrum.peak_windows.emplace_back(parse_real(lohi[0], where(k)),
                                                               parse_real(lohi[1], where(k)));
                    }
                } else unknown(k);
            }
        } else if (name == "schedule") {
            for (const auto& [k, v] : kv) {
                if (k == "schedule_type") cfg.plan.kind = parse_kind(v);
                else if (k == "t1") cfg.plan.t1 = v == "auto" ? std::nullopt : std::optional(parse_real(v, where(k)));
                else if (k == "tau_d") cfg.plan.tau_d = parse_real(v, where(k));
                else if (k == "n_switches") cfg.plan.n_switches = parse_int(v, where(k));
                else if (k == "duration_d") cfg.plan.duration_d = parse_real(v, where(k));
                else if (k == "node_t_min")
                    cfg.plan.node_t_min = v == "auto" ? std::nullopt : std::optional(parse_real(v, where(k)));
                else if (k == "iterative_nodes") cfg.plan.iterative_nodes = parse_bool(v, where(k));
                else unknown(k);
            }
        } else {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    return cfg;
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ScenarioConfig& c) {
    using detail::fmt_real;
    std::ostringstream o;
    o << "[constants]\n"
      << "gamma = " << fmt_real(c.constants.gamma) << "\n"
      << "cg_a = " << fmt_real(c.constants.cg_a) << "\n"
      << "k_xray = " << fmt_real(c.constants.k_xray) << "\n"
      << "n_real = " << fmt_real(c.constants.n_electronic.real()) << "\n"
      << "n_imag = " << fmt_real(c.constants.n_electronic.imag()) << "\n\n";
    o << "[pulse]\n"
      << "t0 = " << fmt_real(c.pulse.t0) << "\n"
      << "tau = " << fmt_real(c.pulse.tau) << "\n\n";
    o << "[grid]\n"
      << "dt = " << fmt_real(c.grid.dt) << "\n"
      << "t_end = " << fmt_real(c.grid.t_end) << "\n"
      << "n_slabs = " << c.grid.n_slabs << "\n\n";
    for (std::size_t i = 0; i < c.targets.size(); ++i) {
        const auto& t = c.targets[i];
        o << "[target" << i + 1 << "]\n"
          << "xi = " << fmt_real(t.xi) << "\n"
          << "thickness_L = " << fmt_real(t.thickness_L) << "\n"
          << "delta_over_gamma = " << fmt_real(t.delta_over_gamma) << "\n"
          << "include_electronic = " << (t.include_electronic ? "true" : "false") << "\n"
          << "switch_times = \"" << detail::fmt_list(t.schedule.switch_times) << "\"\n"
          << "duration_d = " << fmt_real(t.schedule.duration_d) << "\n\n";
    }
    o << "[spectrum]\n"
      << "omega_min = " << fmt_real(c.spectrum.omega_min) << "\n"
      << "omega_max = " << fmt_real(c.spectrum.omega_max) << "\n"
      << "omega_step = " << fmt_real(c.spectrum.omega_step) << "\n";
    if (!c.spectrum.peak_windows.empty()) {
        o << "peak_windows = \"";
        for (std::size_t i = 0; i < c.spectrum.peak_windows.size(); ++i) {
            if (i) o << ", ";
            o << fmt_real(c.spectrum.peak_windows[i].first) << ":"
              << fmt_real(c.spectrum.peak_windows[i].second);
        }
        o << "\"\n";
    }
    o << "\n[schedule]\n"
      << "schedule_type = " << detail::kind_name(c.plan.kind) << "\n"
      << "t1 = " << (c.plan.t1 ? fmt_real(*c.plan.t1) : std::string("auto")) << "\n"
      << "tau_d = " << fmt_real(c.plan.tau_d) << "\n"
      << "n_switches = " << c.plan.n_switches << "\n"
      << "duration_d = " << fmt_real(c.plan.duration_d) << "\n"
      << "node_t_min = " << (c.plan.node_t_min ? fmt_real(*c.plan.node_t_min) : std::string("auto")) << "\n"
      << "iterative_nodes = " << (c.plan.iterative_nodes ? "true" : "false") << "\n";
    return o.str();
}

/// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const ScenarioConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {}) {
    return parse_config(read_text_file(path), std::move(base));
}

}  // namespace nfs
