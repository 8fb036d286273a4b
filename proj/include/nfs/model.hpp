// model.hpp - physical constants, configuration types, time grid and input pulse
//
// Units: times in ns, rates in 1/ns, angular frequencies in rad/ns, lengths in m.
// Detunings and spectral axes are exposed to users in units of Gamma.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nfs/errors.hpp"
#include "nfs/field_record.hpp"
#include "nfs/schedule.hpp"

namespace nfs {

struct NuclearConstants {
    double gamma = 1.0 / 141.0;                 // natural decay rate, 1/ns
    double cg_a = std::sqrt(2.0 / 3.0);         // Clebsch-Gordan coefficient
    double k_xray = 2.0 * std::numbers::pi / 0.0861e-9;  // 14.4 keV, 1/m
    std::complex<double> n_electronic{1.0, 9.13e-8};

    void validate() const {
        if (!(gamma > 0.0)) throw ConfigError("constants: gamma must be positive");
        if (!(cg_a > 0.0 && cg_a <= 1.0)) throw ConfigError("constants: cg_a must lie in (0, 1]");
        if (!(k_xray > 0.0)) throw ConfigError("constants: k_xray must be positive");
        if (n_electronic.imag() < 0.0)
            throw ConfigError("constants: refractive index must be absorptive (Im n >= 0)");
    }
    friend bool operator==(const NuclearConstants&, const NuclearConstants&) = default;
};

/// Gaussian incident pulse exp(-((t - t0)/tau)^2).
struct PulseConfig {
    double t0 = 0.67;
    double tau = 0.1;

    void validate() const {
        if (!(tau > 0.0)) throw ConfigError("pulse: tau must be positive");
        if (t0 < 4.0 * tau) throw ConfigError("pulse: t0 must be at least 4 tau");
    }
    friend bool operator==(const PulseConfig&, const PulseConfig&) = default;
};

struct GridConfig {
    double dt = 0.005;
    double t_end = 1500.0;
    int n_slabs = 128;

    /// Number of intervals N = t_end / dt; throws if not an integer.
    std::size_t n_steps() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("grid: dt must be positive");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("grid: t_end must be positive");
        const double ratio = t_end / dt;
        const double n = std::round(ratio);
        if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n))
            throw ConfigError("grid: t_end / dt must be an integer");
        return static_cast<std::size_t>(n);
    }

    void validate() const {
        if (n_steps() < 2) throw ConfigError("grid: t_end / dt must be at least 2");
        if (n_slabs < 8) throw ConfigError("grid: n_slabs must be at least 8");
    }
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct TargetConfig {
    double xi = 0.0;                   // resonant thickness
    double thickness_L = 10e-6;        // m
    double delta_over_gamma = 0.0;     // hyperfine detuning Delta / Gamma
    bool include_electronic = false;
    SwitchSchedule schedule;

    void validate() const {
        if (!(xi >= 0.0) || !std::isfinite(xi)) throw ConfigError("target: xi must be >= 0");
        if (!(thickness_L > 0.0)) throw ConfigError("target: thickness_L must be positive");
        if (!(delta_over_gamma >= 0.0) || !std::isfinite(delta_over_gamma))
            throw ConfigError("target: delta_over_gamma must be >= 0");
        schedule.validate();
    }
    friend bool operator==(const TargetConfig&, const TargetConfig&) = default;
};

/// Evaluation grid for S(omega), in units of Gamma.
struct SpectrumGridConfig {
    double omega_min = -200.0;
    double omega_max = 200.0;
    double omega_step = 0.05;
    std::vector<std::pair<double, double>> peak_windows;  // optional report windows

    std::vector<double> values() const {
        if (!(omega_step > 0.0) || !(omega_max >= omega_min))
            throw ConfigError("spectrum: need omega_step > 0 and omega_max >= omega_min");
        const auto n = static_cast<std::size_t>(std::floor((omega_max - omega_min) / omega_step + 1e-9)) + 1;
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = omega_min + static_cast<double>(i) * omega_step;
        return w;
    }
    friend bool operator==(const SpectrumGridConfig&, const SpectrumGridConfig&) = default;
};

enum class ScheduleKind { explicit_times, simultaneous, upstream_only, downstream_only, delayed, nodes };

/// Convenience recipe expanded into per-target schedules by the scenario runner.
/// `t1` unset means "first quantum-beat node of the unperturbed run".
struct SchedulePlan {
    ScheduleKind kind = ScheduleKind::explicit_times;
    std::optional<double> t1;
    double tau_d = 0.0;
    int n_switches = 0;
    double duration_d = 2.0;
    std::optional<double> node_t_min;
    bool iterative_nodes = false;

    friend bool operator==(const SchedulePlan&, const SchedulePlan&) = default;
};

struct ScenarioConfig {
    NuclearConstants constants;
    PulseConfig pulse;
    GridConfig grid;
    std::vector<TargetConfig> targets;
    SpectrumGridConfig spectrum;
    SchedulePlan plan;

    void validate() const;
    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Delta in rad/ns from Delta / Gamma.
inline double angular_detuning(double delta_over_gamma, const NuclearConstants& c) {
    return delta_over_gamma * c.gamma;
}

/// t_i = i dt, i = 0..N.
inline std::vector<double> build_time_grid(const GridConfig& grid) {
    const std::size_t n = grid.n_steps();
    if (n < 2) throw ConfigError("grid: t_end / dt must be at least 2");
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = static_cast<double>(i) * grid.dt;
    return t;
}

inline double gaussian_value(const PulseConfig& p, double t) {
    const double x = (t - p.t0) / p.tau;
    return std::exp(-x * x);
}

inline FieldRecord gaussian_input(const PulseConfig& pulse, const GridConfig& grid) {
    pulse.validate();
    if (grid.dt > pulse.tau / 10.0 * (1.0 + 1e-12))
        throw ConfigError("grid: dt must resolve the pulse (dt <= tau / 10)");
    const auto t = build_time_grid(grid);
    FieldRecord rec{0.0, grid.dt, std::vector<cplx>(t.size())};
    const double c = std::round(pulse.t0 / grid.dt);
    const double r = std::fma(-c, grid.dt, pulse.t0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double x = ((static_cast<double>(i) - c) * grid.dt - r) / pulse.tau;
        rec.samples[i] = std::exp(-x * x);
    }
    return rec;
}

inline void ScenarioConfig::validate() const {
    constants.validate();
    pulse.validate();
    grid.validate();
    if (targets.size() > 2) throw ConfigError("scenario: at most two targets");
    if (grid.dt > pulse.tau / 10.0 * (1.0 + 1e-12))
        throw ConfigError("grid: dt must resolve the pulse (dt <= tau / 10)");
    for (const auto& t : targets) {
        t.validate();
        const double delta = angular_detuning(t.delta_over_gamma, constants);
        if (delta > 0.0 && grid.dt > 0.02 / delta * (1.0 + 1e-12))
            throw ConfigError("grid: dt must resolve the hyperfine phase (dt <= 0.02 / Delta)");
    }
    if (targets.size() == 2 && targets[0].delta_over_gamma != targets[1].delta_over_gamma)
        throw ConfigError("scenario: both targets must share delta_over_gamma");
    spectrum.values();
    if (plan.kind != ScheduleKind::explicit_times && targets.empty())
        throw ConfigError("scenario: a switching plan needs at least one target");
    if ((plan.kind == ScheduleKind::delayed || plan.kind == ScheduleKind::downstream_only) &&
        targets.size() != 2)
        throw ConfigError("scenario: schedule types 3 and 4 need two targets");
    if (plan.kind == ScheduleKind::nodes && plan.n_switches < 0)
        throw ConfigError("scenario: n_switches must be >= 0");
}

}  // namespace nfs
