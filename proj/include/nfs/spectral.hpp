// spectral.hpp - normalized output spectrum, peak metrics and spectrograms
//
//   S(omega) = |integral Omega_out(t) e^{i omega t} dt|^2 / max_omega |integral Omega_in(t) e^{i omega t} dt|^2
//
// Integrals use the trapezoidal rule over the finite record. Frequencies are
// rad/ns inside this file except where a name says "over_gamma".
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nfs/errors.hpp"
#include "nfs/fft.hpp"
#include "nfs/field_record.hpp"
#include "nfs/parallel.hpp"

namespace nfs {

namespace detail {

/// Trapezoid-weighted samples with exactly-zero leading and trailing runs removed.
struct WeightedSegment {
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<cplx> values;
};

inline WeightedSegment weighted_segment(const FieldRecord& f) {
    f.validate();
    std::size_t lo = 0, hi = f.size();
    while (lo < hi && f.samples[lo] == cplx{}) ++lo;
    while (hi > lo && f.samples[hi - 1] == cplx{}) --hi;
    WeightedSegment seg{f.time(lo), f.dt, {}};
    seg.values.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        const double w = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
        seg.values.push_back(w * f.samples[i]);
    }
    return seg;
}

inline cplx dtft_point(const WeightedSegment& seg, double omega) {
    constexpr std::size_t resync = 512;
    const cplx step = std::polar(1.0, omega * seg.dt);
    cplx acc{};
    cplx ph{};
    for (std::size_t i = 0; i < seg.values.size(); ++i) {
        if (i % resync == 0) ph = std::polar(1.0, omega * (static_cast<double>(i) * seg.dt));
        acc += seg.values[i] * ph;
        ph *= step;
    }
    return seg.dt * acc * std::polar(1.0, omega * seg.t_start);
}

}  // namespace detail

/// Direct trapezoidal integral of Omega(t) e^{i omega t} dt at each omega (rad/ns).
inline std::vector<cplx> dtft(const FieldRecord& field, std::span<const double> omega) {
    const auto seg = detail::weighted_segment(field);
    std::vector<cplx> out(omega.size());
    if (seg.values.empty()) return out;
    parallel_for(omega.size(), [&](std::size_t k) { out[k] = detail::dtft_point(seg, omega[k]); });
    return out;
}

/// Same quadrature on the uniform grid omega_k = omega0 + k * domega, k < count,
/// evaluated with the chirp-z (Bluestein) transform in O((N + K) log(N + K)).
inline std::vector<cplx> dtft_uniform(const FieldRecord& field, double omega0, double domega,
                                      std::size_t count) {
    std::vector<cplx> out(count);
    const auto seg = detail::weighted_segment(field);
    const std::size_t n = seg.values.size();
    if (n == 0 || count == 0) return out;
    const double a = domega * seg.dt;
    const std::size_t len = next_pow2(n + count - 1);
    std::vector<cplx> u(n), v(len);
    for (std::size_t i = 0; i < n; ++i) {
        const double di = static_cast<double>(i);
        u[i] = seg.values[i] * std::polar(1.0, omega0 * di * seg.dt + 0.5 * a * di * di);
    }
    // v holds e^{-i a m^2 / 2} for m = j - (n - 1), j = 0 .. n + count - 2
    for (std::size_t j = 0; j + 1 < n + count; ++j) {
        const double m = static_cast<double>(j) - static_cast<double>(n - 1);
        v[j] = std::polar(1.0, -0.5 * a * m * m);
    }
    FftPlan fwd(len, FFTW_FORWARD), inv(len, FFTW_BACKWARD);
    const auto fu = fwd.execute(u);
    const auto fv = fwd.execute(v);
    std::vector<cplx> prod(len);
    for (std::size_t i = 0; i < len; ++i) prod[i] = fu[i] * fv[i];
    const auto c = inv.execute(prod);
    const double scale = 1.0 / static_cast<double>(len);
    for (std::size_t k = 0; k < count; ++k) {
        const double dk = static_cast<double>(k);
        const double omega = omega0 + dk * domega;
        out[k] = seg.dt * scale * c[k + n - 1] * std::polar(1.0, 0.5 * a * dk * dk + omega * seg.t_start);
    }
    return out;
}

/// max_omega |dtft(field)|^2: zero-padded FFT scan followed by golden-section refinement.
inline double spectral_peak_power(const FieldRecord& field) {
    const auto seg = detail::weighted_segment(field);
    const std::size_t n = seg.values.size();
    if (n == 0) throw AnalysisError("spectrum: input field is identically zero");
    const std::size_t len = next_pow2(std::max<std::size_t>(16 * n, 4096));
    FftPlan plan(len, FFTW_BACKWARD);
    const auto bins = plan.execute(seg.values);
    std::size_t best = 0;
    for (std::size_t j = 1; j < len; ++j)
        if (std::norm(bins[j]) > std::norm(bins[best])) best = j;
    const double bin = 2.0 * std::numbers::pi / (static_cast<double>(len) * seg.dt);
    const double w_best = (best < len / 2 ? static_cast<double>(best) : static_cast<double>(best) - len) * bin;
    auto power = [&](double w) { return std::norm(detail::dtft_point(seg, w)); };
    double lo = w_best - bin, hi = w_best + bin;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = power(x1), f2 = power(x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 > f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - g * (hi - lo); f1 = power(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + g * (hi - lo); f2 = power(x2);
        }
    }
    const double peak = std::max({f1, f2, power(w_best)});
    if (!(peak > 0.0) || !std::isfinite(peak)) throw AnalysisError("spectrum: zero normalization");
    return peak;
}

struct SpectrumRecord {
    std::vector<double> omega_over_gamma;
    std::vector<double> s_values;
    double normalization = 0.0;
    bool truncation_warning = false;

    std::size_t size() const { return s_values.size(); }

    /// S at the grid point nearest to w (units of Gamma).
    double at(double w) const {
        if (omega_over_gamma.empty()) throw AnalysisError("spectrum: empty record");
        const auto it = std::lower_bound(omega_over_gamma.begin(), omega_over_gamma.end(), w);
        std::size_t i = static_cast<std::size_t>(it - omega_over_gamma.begin());
        if (i == omega_over_gamma.size()) --i;
        if (i > 0 && std::abs(omega_over_gamma[i - 1] - w) < std::abs(omega_over_gamma[i] - w)) --i;
        return s_values[i];
    }

    double max_value() const { return s_values.empty() ? 0.0 : *std::max_element(s_values.begin(), s_values.end()); }
};

enum class SpectrumMethod { automatic, direct, chirp_z };

namespace detail {
inline bool is_uniform(std::span<const double> w) {
    if (w.size() < 3) return false;
    const double step = (w.back() - w.front()) / static_cast<double>(w.size() - 1);
    if (!(step > 0.0)) return false;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (std::abs(w[i] - (w.front() + static_cast<double>(i) * step)) > 1e-9 * std::max(1.0, std::abs(step) * w.size()))
            return false;
    return true;
}
}  // namespace detail

/// S on the grid omega_over_gamma (sorted, units of Gamma). `automatic` uses the
/// chirp-z path for uniform grids and direct summation otherwise.
inline SpectrumRecord normalized_spectrum(const FieldRecord& input, const FieldRecord& output,
                                          std::span<const double> omega_over_gamma, double gamma,
                                          SpectrumMethod method = SpectrumMethod::automatic) {
    if (!std::is_sorted(omega_over_gamma.begin(), omega_over_gamma.end()))
        throw ConfigError("spectrum: omega grid must be sorted");
    if (std::abs(input.dt - output.dt) > 1e-12 * input.dt)
        throw ConfigError("spectrum: input and output records must share dt");
    SpectrumRecord rec;
    rec.omega_over_gamma.assign(omega_over_gamma.begin(), omega_over_gamma.end());
    rec.normalization = spectral_peak_power(input);
    rec.truncation_warning = output.tail_ratio() > 1e-2;
    if (method == SpectrumMethod::automatic)
        method = detail::is_uniform(omega_over_gamma) ? SpectrumMethod::chirp_z : SpectrumMethod::direct;
    std::vector<cplx> f;
    if (method == SpectrumMethod::chirp_z) {
        if (!detail::is_uniform(omega_over_gamma))
            throw ConfigError("spectrum: chirp-z evaluation needs a uniform omega grid");
        const double w0 = omega_over_gamma.front() * gamma;
        const double dw = (omega_over_gamma.back() - omega_over_gamma.front()) * gamma /
                          static_cast<double>(omega_over_gamma.size() - 1);
        f = dtft_uniform(output, w0, dw, omega_over_gamma.size());
    } else {
        std::vector<double> w(omega_over_gamma.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = omega_over_gamma[i] * gamma;
        f = dtft(output, w);
    }
    rec.s_values.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) rec.s_values[i] = std::norm(f[i]) / rec.normalization;
    return rec;
}

struct PeakReport {
    double center = 0.0;  // omega / Gamma
    double height = 0.0;
    double fwhm = 0.0;    // units of Gamma
};

/// Largest local maximum of S inside [lo, hi] (units of Gamma). The center and
/// height come from a parabola through the three samples around the maximum;
/// the FWHM from linear interpolation of the nearest half-height crossings.
inline PeakReport peak_metrics(const SpectrumRecord& s, double lo, double hi) {
    const auto& w = s.omega_over_gamma;
    const auto& v = s.s_values;
    std::size_t best = v.size();
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (w[i] < lo || w[i] > hi) continue;
        if (v[i] >= v[i - 1] && v[i] >= v[i + 1] && (best == v.size() || v[i] > v[best])) best = i;
    }
    if (best == v.size() || !(v[best] > 0.0))
        throw AnalysisError("peak_metrics: no peak in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    PeakReport r;
    const double y0 = v[best - 1], y1 = v[best], y2 = v[best + 1];
    const double curv = y0 - 2.0 * y1 + y2;
    double off = 0.0;
    if (curv < 0.0) off = 0.5 * (y0 - y2) / curv;
    const double step = 0.5 * (w[best + 1] - w[best - 1]);
    r.center = w[best] + off * step;
    r.height = curv < 0.0 ? y1 - 0.25 * (y0 - y2) * off : y1;
    const double half = 0.5 * r.height;

    auto crossing = [&](std::size_t i, std::size_t j) {
        // v[i] >= half > v[j], adjacent samples
        return w[i] + (w[j] - w[i]) * (v[i] - half) / (v[i] - v[j]);
    };
    std::size_t i = best;
    while (i > 0 && v[i - 1] >= half) --i;
    if (i == 0 || w[i - 1] < lo) throw AnalysisError("peak_metrics: left half-height crossing outside window");
    const double left = crossing(i, i - 1);
    std::size_t j = best;
    while (j + 1 < v.size() && v[j + 1] >= half) ++j;
    if (j + 1 == v.size() || w[j + 1] > hi) throw AnalysisError("peak_metrics: right half-height crossing outside window");
    const double right = crossing(j, j + 1);
    r.fwhm = right - left;
    return r;
}

/// max over mirrored sample pairs of |S(w) - S(-w)| / max(S(w), S(-w)), ignoring
/// pairs whose larger value is below `floor` times the spectrum maximum.
inline double symmetry_error(const SpectrumRecord& s, double floor = 1e-9) {
    const double cut = floor * s.max_value();
    const auto& w = s.omega_over_gamma;
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        const auto it = std::lower_bound(w.begin(), w.end(), -w[i] - 1e-9 * std::max(1.0, w[i]));
        if (it == w.end() || std::abs(*it + w[i]) > 1e-9 * std::max(1.0, w[i])) continue;
        const double a = s.s_values[i];
        const double b = s.s_values[static_cast<std::size_t>(it - w.begin())];
        const double m = std::max(a, b);
        if (m <= cut) continue;
        worst = std::max(worst, std::abs(a - b) / m);
    }
    return worst;
}

struct Spectrogram {
    std::vector<double> params;
    std::vector<double> omega_over_gamma;
    std::vector<std::vector<double>> s;  // s[row][column]
};

/// Rows sorted by parameter; all rows must share the omega grid.
inline Spectrogram assemble_spectrogram(const std::vector<std::pair<double, SpectrumRecord>>& rows) {
    Spectrogram g;
    if (rows.empty()) return g;
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].first < rows[b].first; });
    g.omega_over_gamma = rows[order.front()].second.omega_over_gamma;
    for (std::size_t k : order) {
        if (rows[k].second.omega_over_gamma != g.omega_over_gamma)
            throw ConfigError("spectrogram: rows use different omega grids");
        g.params.push_back(rows[k].first);
        g.s.push_back(rows[k].second.s_values);
    }
    return g;
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumRecord& s) {
    os << "omega_over_gamma,s\n";
    char buf[64];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.12e\n", s.omega_over_gamma[i], s.s_values[i]);
        os << buf;
    }
}

inline void write_spectrogram_csv(std::ostream& os, const Spectrogram& g) {
    os << "param,omega_over_gamma,s\n";
    char buf[96];
    for (std::size_t r = 0; r < g.params.size(); ++r)
        for (std::size_t c = 0; c < g.omega_over_gamma.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12e\n", g.params[r], g.omega_over_gamma[c], g.s[r][c]);
            os << buf;
        }
}

}  // namespace nfs
