// analytic_response.hpp - Bessel-envelope response of thick resonant targets
//
// An isolated resonance line of thickness xi_l scatters a delta pulse into
//   W0(t) = sqrt(Gamma xi_l / t) J1(2 sqrt(Gamma xi_l t)) exp(-Gamma t / 2)      [1/ns]
// and a switched detuning only rephases it. For the line at +Delta M(t):
//   (L x)(t) = exp(-i Delta Phi(t)) * integral_0^t W0(t - t') exp(+i Delta Phi(t')) x(t') dt',
// with Phi(t) = integral_0^t M. A target carries two such lines (+-Delta) with
// xi_l = xi / 2 each, and transmits (I - L+)(I - L-) = I - L+ - L- + L+ L-.
// For unswitched targets this is the exact Green's function of the Bloch/field
// equations in obe_solver.hpp; with switching it is an ordering approximation.
//
// The single-envelope model (thickness xi on one line, real part taken) is
// available as ResponseModel::printed_envelope for comparison.
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "nfs/bessel.hpp"
#include "nfs/errors.hpp"
#include "nfs/fft.hpp"
#include "nfs/field_record.hpp"
#include "nfs/schedule.hpp"

namespace nfs {

struct ResponseParams {
    double xi = 0.0;
    double gamma = 1.0 / 141.0;  // 1/ns
    double delta = 0.0;          // rad/ns
    SwitchSchedule schedule;     // empty = unperturbed
    cplx electronic_gain{1.0};   // uniform attenuation exp(e L) of the target

    void validate() const {
        if (!(xi >= 0.0)) throw ConfigError("response: xi must be >= 0");
        if (!(gamma > 0.0)) throw ConfigError("response: gamma must be positive");
        schedule.validate();
    }
};

enum class ResponseModel { line_resolved, printed_envelope };

/// Single-target response W(M, t) = xi / sqrt(xi Gamma t) J1(2 sqrt(xi Gamma t)) e^{-Gamma t/2 + i Delta Phi(t)},
/// dimensionless; its t -> 0+ limit xi is returned at t = 0.
inline cplx response_w(const ResponseParams& p, double t) {
    if (t < 0.0) throw ConfigError("response_w: t must be non-negative");
    const double phase = p.delta * phase_integral(p.schedule, t);
    const double decay = std::exp(-0.5 * p.gamma * t);
    const double z = p.xi * p.gamma * t;
    const double env = z > 0.0 ? p.xi / std::sqrt(z) * bessel_j1(2.0 * std::sqrt(z)) : p.xi;
    return env * decay * std::polar(1.0, phase);
}

/// W0 for one line of thickness xi_line, in 1/ns (limit Gamma xi_line at t = 0).
inline double line_envelope(double xi_line, double gamma, double t) {
    const double kappa = gamma * xi_line;
    const double z = kappa * t;
    const double env = z > 0.0 ? std::sqrt(kappa / t) * bessel_j1(2.0 * std::sqrt(z)) : kappa;
    return env * std::exp(-0.5 * gamma * t);
}

/// Incident excitation: optional unit-weight delta at t = 0 plus a smooth record
/// starting at t = 0.
struct Excitation {
    cplx delta_weight{};
    FieldRecord smooth;

    static Excitation delta_pulse(double dt, std::size_t n) {
        return {cplx(1.0), FieldRecord{0.0, dt, std::vector<cplx>(n)}};
    }
    static Excitation from_record(FieldRecord rec) { return {cplx{}, std::move(rec)}; }
};

/// Output of a scattering chain: the delta part is carried symbolically.
using ScatteredField = Excitation;

namespace detail {

struct LineOperator {
    std::vector<cplx> kernel;   // W0 on the grid
    std::vector<cplx> rephase;  // exp(i Delta Phi(t)) for this line's sign
    double dt;
    ConvolutionMethod method;

    LineOperator(double xi_line, const ResponseParams& p, double sign, double dt_, std::size_t n,
                 ConvolutionMethod m)
        : kernel(n), rephase(n), dt(dt_), method(m) {
        const auto phi = phase_on_grid(p.schedule, 0.0, dt, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * dt;
            kernel[i] = line_envelope(xi_line, p.gamma, t);
            rephase[i] = std::polar(1.0, sign * p.delta * phi[i]);
        }
    }

    Excitation apply(const Excitation& x) const {
        const std::size_t n = kernel.size();
        std::vector<cplx> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = rephase[i] * x.smooth.samples[i];
        auto y = causal_convolution(kernel, g, dt, method);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = std::conj(rephase[i]) * (y[i] + x.delta_weight * kernel[i]);
        return Excitation{cplx{}, FieldRecord{x.smooth.t_start, dt, std::move(y)}};
    }
};

inline Excitation combine(std::initializer_list<std::pair<cplx, const Excitation*>> terms) {
    const auto& first = *terms.begin()->second;
    Excitation out{cplx{}, FieldRecord{first.smooth.t_start, first.smooth.dt,
                                       std::vector<cplx>(first.smooth.size())}};
    for (const auto& [c, e] : terms) {
        out.delta_weight += c * e->delta_weight;
        for (std::size_t i = 0; i < out.smooth.size(); ++i) out.smooth.samples[i] += c * e->smooth.samples[i];
    }
    return out;
}

inline Excitation apply_target(const ResponseParams& p, const Excitation& x, ResponseModel model,
                               ConvolutionMethod method) {
    p.validate();
    if (x.smooth.t_start != 0.0 || !(x.smooth.dt > 0.0) || x.smooth.size() < 2)
        throw ConfigError("response: excitation must be a uniform record starting at t = 0");
    const double dt = x.smooth.dt;
    const std::size_t n = x.smooth.size();
    Excitation out;
    if (p.xi == 0.0) {
        out = x;
    } else if (model == ResponseModel::line_resolved) {
        const LineOperator up(0.5 * p.xi, p, +1.0, dt, n, method);
        const LineOperator down(0.5 * p.xi, p, -1.0, dt, n, method);
        const auto lp = up.apply(x);
        const auto lm = down.apply(x);
        const auto lpm = up.apply(lm);
        out = combine({{1.0, &x}, {-1.0, &lp}, {-1.0, &lm}, {1.0, &lpm}});
    } else {
        const LineOperator up(p.xi, p, +1.0, dt, n, method);
        const LineOperator down(p.xi, p, -1.0, dt, n, method);
        const auto lp = up.apply(x);
        const auto lm = down.apply(x);
        out = combine({{1.0, &x}, {-0.5, &lp}, {-0.5, &lm}});
    }
    out.delta_weight *= p.electronic_gain;
    for (auto& z : out.smooth.samples) z *= p.electronic_gain;
    return out;
}

}  // namespace detail

/// E1 = delta - W1 (symbolic delta) or input - W1 (*) input.
inline ScatteredField scattered_field_one_target(const ResponseParams& p, const Excitation& input,
                                                 ResponseModel model = ResponseModel::line_resolved,
                                                 ConvolutionMethod method = ConvolutionMethod::transform) {
    return detail::apply_target(p, input, model, method);
}

/// E2 = delta - W1 - W2 + W2 (*) W1: the first target then the second.
inline ScatteredField scattered_field_two_target(const ResponseParams& p1, const ResponseParams& p2,
                                                 const Excitation& input,
                                                 ResponseModel model = ResponseModel::line_resolved,
                                                 ConvolutionMethod method = ConvolutionMethod::transform) {
    if (p1.gamma != p2.gamma || p1.delta != p2.delta)
        throw ConfigError("response: both targets must share Gamma and Delta");
    return detail::apply_target(p2, detail::apply_target(p1, input, model, method), model, method);
}

/// Multiplies the field by a sign that is +1 up to t_flip and flips at every
/// node after it, making the lobes after t_flip share the sign of the first.
/// Nodes at or before t_flip are ignored.
inline FieldRecord rectified_max_field(const FieldRecord& field, double t_flip,
                                       std::span<const double> nodes) {
    for (std::size_t k = 1; k < nodes.size(); ++k)
        if (nodes[k] < nodes[k - 1]) throw ConfigError("rectified_max_field: nodes must be sorted");
    FieldRecord out = field;
    std::size_t k = 0;
    while (k < nodes.size() && nodes[k] <= t_flip) ++k;
    double sign = 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = out.time(i);
        while (k < nodes.size() && t > nodes[k]) {
            sign = -sign;
            ++k;
        }
        out.samples[i] *= sign;
    }
    return out;
}

}  // namespace nfs
