// switching.hpp - switching-type schedules and temporal node detection
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nfs/errors.hpp"
#include "nfs/field_record.hpp"
#include "nfs/schedule.hpp"

namespace nfs {

/// Schedules for (target 1, target 2) for switching types
///   1: both at t1, 2: target 1 only, 3: target 2 only, 4: t1 and t1 + tau_D.
inline std::pair<SwitchSchedule, SwitchSchedule> make_type_schedules(int type, double t1,
                                                                     double tau_d, double d) {
    if (!(t1 > 0.0)) throw ConfigError("switching: t1 must be positive");
    SwitchSchedule a{{}, d}, b{{}, d};
    switch (type) {
        case 1: a.switch_times = {t1}; b.switch_times = {t1}; break;
        case 2: a.switch_times = {t1}; break;
        case 3: b.switch_times = {t1}; break;
        case 4:
            if (!(t1 + tau_d > 0.0)) throw ConfigError("switching: t1 + tau_D must be positive");
            a.switch_times = {t1};
            b.switch_times = {t1 + tau_d};
            break;
        default: throw ConfigError("switching: invalid type " + std::to_string(type));
    }
    a.validate();
    b.validate();
    return {std::move(a), std::move(b)};
}

/// Local minima of |Omega|^2 for t > t_min, refined by a parabola through the
/// three samples around each discrete minimum.
inline std::vector<double> detect_nodes(const FieldRecord& field, double t_min) {
    if (field.samples.empty()) throw ConfigError("detect_nodes: empty field record");
    std::vector<double> nodes;
    const auto& s = field.samples;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (field.time(i) <= t_min) continue;
        const double y0 = std::norm(s[i - 1]), y1 = std::norm(s[i]), y2 = std::norm(s[i + 1]);
        if (!(y1 < y0 && y1 <= y2)) continue;
        const double curv = y0 - 2.0 * y1 + y2;
        double offset = 0.0;
        if (curv > 0.0) offset = 0.5 * (y0 - y2) / curv;
        nodes.push_back(field.time(i) + offset * field.dt);
    }
    return nodes;
}

/// Drops consecutive nodes that lie closer than `min_gap`, as pairs.
///
/// Such pairs straddle a zero of the dynamical-beat envelope. Inverting at both
/// only slips the quantum-beat phase; skipping both flips the envelope sign.
inline std::vector<double> drop_close_pairs(const std::vector<double>& nodes, double min_gap) {
    std::vector<double> out;
    std::size_t i = 0;
    while (i < nodes.size()) {
        if (i + 1 < nodes.size() && nodes[i + 1] - nodes[i] < min_gap) {
            i += 2;
            continue;
        }
        out.push_back(nodes[i]);
        ++i;
    }
    return out;
}

/// Inversion at every node except the first: switch_times = nodes[1..n].
inline SwitchSchedule node_schedule(const std::vector<double>& nodes, int n_switches, double d) {
    if (n_switches < 0) throw ConfigError("node_schedule: n_switches must be >= 0");
    SwitchSchedule s{{}, d};
    if (n_switches == 0) return s;
    const auto usable = drop_close_pairs(nodes, SwitchSchedule::min_separation(d));
    if (usable.size() < static_cast<std::size_t>(n_switches) + 1)
        throw AnalysisError("node_schedule: " + std::to_string(n_switches) +
                            " switches requested but only " +
                            std::to_string(usable.empty() ? 0 : usable.size() - 1) +
                            " usable nodes follow the first");
    s.switch_times.assign(usable.begin() + 1, usable.begin() + 1 + n_switches);
    s.validate();
    return s;
}

}  // namespace nfs
