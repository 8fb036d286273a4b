// obe_solver.hpp - Maxwell-Bloch integration of one or two resonant targets
//
// Per target and slab the two Delta m = 0 coherences obey
//   d/dt rho31 = -(Gamma/2 + i Delta M(t)) rho31 + i (a/4) Omega
//   d/dt rho42 = -(Gamma/2 - i Delta M(t)) rho42 + i (a/4) Omega
// and, in the retarded frame, the field obeys
//   d/dy Omega = i eta (rho31 + rho42) + e Omega,   eta = 2 Gamma xi / (a L),
// with e = -(k / 2i)(n^2 - 1) the electronic term. Coherences live at slab
// centers and the field at slab faces. The coupled system is marched with
// classical RK4 as a method of lines: each stage re-transports the field
// through every target, so target j + 1 sees target j's exit field at the
// same stage time.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nfs/errors.hpp"
#include "nfs/field_record.hpp"
#include "nfs/model.hpp"
#include "nfs/schedule.hpp"

namespace nfs {

struct SlabState {
    std::vector<cplx> rho31;
    std::vector<cplx> rho42;

    SlabState() = default;
    explicit SlabState(std::size_t n_slabs) : rho31(n_slabs), rho42(n_slabs) {}
    std::size_t size() const { return rho31.size(); }
};

struct PropagationCoefficients {
    double eta = 0.0;           // 1/(m ns)
    cplx electronic_term{};     // 1/m
    double slab_dy = 0.0;       // m
    std::size_t n_slabs = 0;

    // Per-slab exact integration of d/dy Omega = i eta S + e Omega with S constant:
    //   Omega_out = g Omega_in + i eta dy phi S.
    cplx g_full{1.0}, phi_full{1.0}, g_half{1.0}, phi_half{1.0};
};

inline PropagationCoefficients make_coefficients(const TargetConfig& target,
                                                 const NuclearConstants& c, int n_slabs) {
    if (n_slabs < 1) throw ConfigError("solver: n_slabs must be positive");
    PropagationCoefficients p;
    p.n_slabs = static_cast<std::size_t>(n_slabs);
    p.eta = 2.0 * c.gamma * target.xi / (c.cg_a * target.thickness_L);
    p.slab_dy = target.thickness_L / n_slabs;
    if (target.include_electronic) {
        const cplx n = c.n_electronic;
        p.electronic_term = -(c.k_xray / cplx(0.0, 2.0)) * (n * n - 1.0);
    }
    auto factors = [&](double h, cplx& g, cplx& phi) {
        const cplx x = p.electronic_term * h;
        g = std::exp(x);
        phi = std::abs(x) < 1e-8 ? 1.0 + 0.5 * x : (g - 1.0) / x;
    };
    factors(p.slab_dy, p.g_full, p.phi_full);
    factors(0.5 * p.slab_dy, p.g_half, p.phi_half);
    return p;
}

namespace detail {

inline cplx mul(cplx a, cplx b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
inline cplx times_i(cplx z) { return {-z.imag(), z.real()}; }

// M(t) without evaluating tanh on the +-1 plateaus.
class ProfileEvaluator {
public:
    explicit ProfileEvaluator(const SwitchSchedule& s)
        : schedule_(&s), windows_(transition_windows(s)) {}

    double operator()(double t) const {
        if (schedule_->empty()) return 1.0;
        for (const auto& [a, b] : windows_)
            if (t >= a && t <= b) return profile_value(*schedule_, t);
        return plateau_sign(*schedule_, t);
    }

private:
    const SwitchSchedule* schedule_;
    std::vector<std::pair<double, double>> windows_;
};

// Field at slab centers and exit, from coherences at one instant.
inline cplx transport(const cplx* r31, const cplx* r42, cplx omega_in,
                      const PropagationCoefficients& p, cplx* centers) {
    const cplx src_full = cplx(0.0, p.eta * p.slab_dy) * p.phi_full;
    const cplx src_half = cplx(0.0, 0.5 * p.eta * p.slab_dy) * p.phi_half;
    cplx face = omega_in;
    for (std::size_t i = 0; i < p.n_slabs; ++i) {
        const cplx s = r31[i] + r42[i];
        if (centers) centers[i] = mul(p.g_half, face) + mul(src_half, s);
        face = mul(p.g_full, face) + mul(src_full, s);
    }
    return face;
}

struct TargetRuntime {
    PropagationCoefficients coeffs;
    ProfileEvaluator profile;
    double delta;
};

}  // namespace detail

/// One RK4 step of both coherence sequences under a drive held constant over the step.
inline SlabState step_coherences(const SlabState& state, std::span<const cplx> omega_at_slabs,
                                 double delta, const SwitchSchedule& schedule, double t,
                                 double gamma, double cg_a, double dt) {
    const std::size_t n = state.size();
    if (omega_at_slabs.size() != n || state.rho42.size() != n)
        throw ConfigError("step_coherences: slab count mismatch");
    const double m0 = profile_value(schedule, t);
    const double mh = profile_value(schedule, t + 0.5 * dt);
    const double m1 = profile_value(schedule, t + dt);
    SlabState out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx drive = cplx(0.0, 0.25 * cg_a) * omega_at_slabs[i];
        auto rk4 = [&](cplx y, double sign) {
            auto f = [&](double m, cplx r) { return cplx(-0.5 * gamma, -sign * delta * m) * r + drive; };
            const cplx k1 = f(m0, y);
            const cplx k2 = f(mh, y + 0.5 * dt * k1);
            const cplx k3 = f(mh, y + 0.5 * dt * k2);
            const cplx k4 = f(m1, y + dt * k3);
            return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        };
        out.rho31[i] = rk4(state.rho31[i], +1.0);
        out.rho42[i] = rk4(state.rho42[i], -1.0);
        if (!std::isfinite(out.rho31[i].real()) || !std::isfinite(out.rho31[i].imag()) ||
            !std::isfinite(out.rho42[i].real()) || !std::isfinite(out.rho42[i].imag()))
            throw NumericalError("step_coherences: non-finite coherence in slab " +
                                 std::to_string(i) + " at t = " + std::to_string(t) + " ns");
    }
    return out;
}

struct TransportResult {
    std::vector<cplx> faces;    // n_slabs + 1 values, faces[0] = input
    std::vector<cplx> centers;  // field at slab centers
    cplx exit{};
};

/// Integrates d/dy Omega across the target for the given coherences.
inline TransportResult transport_field(const SlabState& state, cplx omega_in,
                                       const PropagationCoefficients& p) {
    if (state.size() != p.n_slabs) throw ConfigError("transport_field: slab count mismatch");
    TransportResult r;
    r.faces.resize(p.n_slabs + 1);
    r.centers.resize(p.n_slabs);
    const cplx src_full = cplx(0.0, p.eta * p.slab_dy) * p.phi_full;
    const cplx src_half = cplx(0.0, 0.5 * p.eta * p.slab_dy) * p.phi_half;
    r.faces[0] = omega_in;
    for (std::size_t i = 0; i < p.n_slabs; ++i) {
        const cplx s = state.rho31[i] + state.rho42[i];
        r.centers[i] = p.g_half * r.faces[i] + src_half * s;
        r.faces[i + 1] = p.g_full * r.faces[i] + src_full * s;
    }
    r.exit = r.faces.back();
    return r;
}

namespace detail {

// Marches all targets jointly. `input_at(n, stage)` returns the incident field
// at t_n (stage 0), t_n + dt/2 (stages 1, 2) and t_n + dt (stage 3).
template <class InputAt>
FieldRecord march_chain(InputAt&& input_at, std::span<const TargetConfig> targets,
                        const NuclearConstants& constants, const GridConfig& grid) {
    constants.validate();
    grid.validate();
    const std::size_t steps = grid.n_steps();
    const std::size_t ns = static_cast<std::size_t>(grid.n_slabs);
    const double dt = grid.dt;
    const double gamma = constants.gamma;
    const double a4 = 0.25 * constants.cg_a;

    std::vector<TargetRuntime> rt;
    rt.reserve(targets.size());
    for (const auto& t : targets) {
        t.validate();
        rt.push_back({make_coefficients(t, constants, grid.n_slabs), ProfileEvaluator(t.schedule),
                      angular_detuning(t.delta_over_gamma, constants)});
    }
    const std::size_t nt = rt.size();
    const std::size_t total = nt * ns;

    std::vector<cplx> r31(total), r42(total), s31(total), s42(total);
    std::vector<cplx> k31[4], k42[4];
    for (int s = 0; s < 4; ++s) {
        k31[s].assign(total, cplx{});
        k42[s].assign(total, cplx{});
    }
    std::vector<cplx> centers(ns);

    // Derivatives of (y31, y42) at time t with incident field omega_in; returns the exit field.
    auto deriv = [&](const cplx* y31, const cplx* y42, double t, cplx omega_in, cplx* d31, cplx* d42) {
        cplx field = omega_in;
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t off = j * ns;
            const auto& tr = rt[j];
            const double dm = tr.delta * tr.profile(t);
            const cplx cp(-0.5 * gamma, -dm), cm(-0.5 * gamma, dm);
            field = transport(y31 + off, y42 + off, field, tr.coeffs, centers.data());
            for (std::size_t i = 0; i < ns; ++i) {
                const cplx drive = times_i(centers[i]) * a4;
                d31[off + i] = mul(cp, y31[off + i]) + drive;
                d42[off + i] = mul(cm, y42[off + i]) + drive;
            }
        }
        return field;
    };

    FieldRecord out{0.0, dt, std::vector<cplx>(steps + 1)};
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        out.samples[n] = deriv(r31.data(), r42.data(), t, input_at(n, 0), k31[0].data(), k42[0].data());
        for (int s = 1; s < 4; ++s) {
            const double h = s == 3 ? dt : 0.5 * dt;
            for (std::size_t i = 0; i < total; ++i) {
                s31[i] = r31[i] + h * k31[s - 1][i];
                s42[i] = r42[i] + h * k42[s - 1][i];
            }
            deriv(s31.data(), s42.data(), t + h, input_at(n, s), k31[s].data(), k42[s].data());
        }
        for (std::size_t i = 0; i < total; ++i) {
            r31[i] += dt / 6.0 * (k31[0][i] + 2.0 * k31[1][i] + 2.0 * k31[2][i] + k31[3][i]);
            r42[i] += dt / 6.0 * (k42[0][i] + 2.0 * k42[1][i] + 2.0 * k42[2][i] + k42[3][i]);
        }
        const cplx probe = out.samples[n];
        if (!std::isfinite(probe.real()) || !std::isfinite(probe.imag())) {
            for (std::size_t i = 0; i < total; ++i)
                if (!std::isfinite(std::abs(r31[i])) || !std::isfinite(std::abs(r42[i])))
                    throw NumericalError("solver: non-finite coherence in target " +
                                         std::to_string(i / ns + 1) + " slab " +
                                         std::to_string(i % ns) + " at t = " + std::to_string(t) + " ns");
            throw NumericalError("solver: non-finite field at t = " + std::to_string(t) + " ns");
        }
    }
    out.samples[steps] = deriv(r31.data(), r42.data(), static_cast<double>(steps) * dt,
                               input_at(steps, 0), k31[0].data(), k42[0].data());
    const cplx last = out.samples[steps];
    if (!std::isfinite(last.real()) || !std::isfinite(last.imag()))
        throw NumericalError("solver: non-finite field at t_end");
    return out;
}

}  // namespace detail

/// Final exit field of the target chain for a sampled incident record on the grid.
/// Half-step values of the input use 4-point interpolation.
inline FieldRecord run_chain(const FieldRecord& input, std::span<const TargetConfig> targets,
                             const NuclearConstants& constants, const GridConfig& grid) {
    input.validate();
    const std::size_t steps = grid.n_steps();
    if (input.size() != steps + 1 || std::abs(input.dt - grid.dt) > 1e-15 * grid.dt ||
        input.t_start != 0.0)
        throw ConfigError("run_chain: input record must be sampled on the solver grid");
    const auto& f = input.samples;
    auto input_at = [&](std::size_t n, int stage) -> cplx {
        if (stage == 0) return f[n];
        if (stage == 3) return f[n + 1];
        if (n == 0) return (3.0 * f[0] + 6.0 * f[1] - f[2]) / 8.0;
        if (n + 1 == steps) return (-f[n - 1] + 6.0 * f[n] + 3.0 * f[n + 1]) / 8.0;
        return (-f[n - 1] + 9.0 * f[n] + 9.0 * f[n + 1] - f[n + 2]) / 16.0;
    };
    return detail::march_chain(input_at, targets, constants, grid);
}

/// Exit field for the Gaussian pulse, evaluated exactly at every stage time.
inline FieldRecord run_chain(const PulseConfig& pulse, std::span<const TargetConfig> targets,
                             const NuclearConstants& constants, const GridConfig& grid) {
    pulse.validate();
    const double dt = grid.dt;
    auto input_at = [&](std::size_t n, int stage) -> cplx {
        const double off = stage == 0 ? 0.0 : stage == 3 ? dt : 0.5 * dt;
        return gaussian_value(pulse, static_cast<double>(n) * dt + off);
    };
    return detail::march_chain(input_at, targets, constants, grid);
}

inline FieldRecord run_target(const FieldRecord& input, const TargetConfig& target,
                              const NuclearConstants& constants, const GridConfig& grid) {
    return run_chain(input, std::span<const TargetConfig>(&target, 1), constants, grid);
}

inline FieldRecord run_target(const PulseConfig& pulse, const TargetConfig& target,
                              const NuclearConstants& constants, const GridConfig& grid) {
    return run_chain(pulse, std::span<const TargetConfig>(&target, 1), constants, grid);
}

}  // namespace nfs
