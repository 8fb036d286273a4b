// schedule.hpp - magnetic inversion schedules and the switching profile M(t)
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nfs/errors.hpp"

namespace nfs {

/// Ordered magnetic-inversion instants (ns) and the common transition duration d.
///
/// The profile is M(t) = prod_k [-tanh((t - t_k) / (0.25 d))]: +1 before the
/// first switch, alternating sign after each one.
struct SwitchSchedule {
    std::vector<double> switch_times;
    double duration_d = 2.0;

    bool empty() const { return switch_times.empty(); }

    /// Minimum separation of consecutive switches for the product form to stay
    /// a clean sequence of +-1 plateaus.
    static double min_separation(double d) { return 2.0 * d; }

    void validate() const {
        if (!(duration_d > 0.0) || !std::isfinite(duration_d))
            throw ConfigError("switch schedule: duration_d must be positive");
        for (std::size_t k = 0; k < switch_times.size(); ++k) {
            if (!std::isfinite(switch_times[k]))
                throw ConfigError("switch schedule: non-finite switch time");
            if (k == 0) continue;
            const double gap = switch_times[k] - switch_times[k - 1];
            if (!(gap > 0.0))
                throw ConfigError("switch schedule: switch times must be strictly increasing");
            if (gap < min_separation(duration_d))
                throw ConfigError("switch schedule: switches at " +
                                  std::to_string(switch_times[k - 1]) + " and " +
                                  std::to_string(switch_times[k]) +
                                  " ns overlap (need spacing >= 2 d)");
        }
    }

    friend bool operator==(const SwitchSchedule&, const SwitchSchedule&) = default;
};

/// M(t); exactly +1 for an empty schedule.
inline double profile_value(const SwitchSchedule& s, double t) {
    const double w = 0.25 * s.duration_d;
    double m = 1.0;
    for (double tk : s.switch_times) m *= -std::tanh((t - tk) / w);
    return m;
}

namespace detail {

// Outside [t_k - 12w, t_k + 12w] every tanh factor rounds to exactly +-1.
inline std::vector<std::pair<double, double>> transition_windows(const SwitchSchedule& s) {
    const double half = 12.0 * 0.25 * s.duration_d;
    std::vector<std::pair<double, double>> out;
    for (double tk : s.switch_times) {
        const double a = tk - half, b = tk + half;
        if (!out.empty() && a <= out.back().second)
            out.back().second = std::max(out.back().second, b);
        else
            out.emplace_back(a, b);
    }
    return out;
}

inline double plateau_sign(const SwitchSchedule& s, double t) {
    double m = 1.0;
    for (double tk : s.switch_times)
        if (t > tk) m = -m;
    return m;
}

// 5-point Gauss-Legendre on [a, b].
inline double gauss5(const SwitchSchedule& s, double a, double b) {
    static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                             -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> wt{0.5688888888888889, 0.4786286704993665,
                                              0.4786286704993665, 0.2369268850561891,
                                              0.2369268850561891};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < 5; ++i) acc += wt[i] * profile_value(s, c + h * x[i]);
    return acc * h;
}

inline double integrate_window(const SwitchSchedule& s, double a, double b) {
    if (b <= a) return 0.0;
    const double piece = 0.0625 * s.duration_d;  // w / 4
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / piece)));
    const double h = (b - a) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += gauss5(s, a + i * h, a + (i + 1) * h);
    return acc;
}

}  // namespace detail

/// Phi(t) = integral of M from 0 to t; equals t exactly for an empty schedule.
inline double phase_integral(const SwitchSchedule& s, double t) {
    if (s.empty()) return t;
    if (t < 0.0) throw ConfigError("phase_integral: t must be non-negative");
    double acc = 0.0, cursor = 0.0;
    for (const auto& [a, b] : detail::transition_windows(s)) {
        if (cursor >= t) break;
        const double lo = std::max(a, cursor);
        if (lo > cursor) {
            const double end = std::min(lo, t);
            acc += detail::plateau_sign(s, 0.5 * (cursor + end)) * (end - cursor);
            cursor = end;
            if (cursor >= t) break;
        }
        const double hi = std::min(b, t);
        if (hi > cursor) {
            acc += detail::integrate_window(s, cursor, hi);
            cursor = hi;
        }
    }
    if (cursor < t) acc += detail::plateau_sign(s, 0.5 * (cursor + t)) * (t - cursor);
    return acc;
}

/// Phi sampled at t_start + i dt, i = 0..n-1, by cumulative quadrature.
inline std::vector<double> phase_on_grid(const SwitchSchedule& s, double t_start, double dt,
                                         std::size_t n) {
    std::vector<double> phi(n);
    if (n == 0) return phi;
    if (s.empty()) {
        for (std::size_t i = 0; i < n; ++i) phi[i] = t_start + static_cast<double>(i) * dt;
        return phi;
    }
    const auto windows = detail::transition_windows(s);
    phi[0] = phase_integral(s, t_start);
    std::size_t w = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double a = t_start + static_cast<double>(i - 1) * dt;
        const double b = t_start + static_cast<double>(i) * dt;
        while (w < windows.size() && windows[w].second < a) ++w;
        const bool inside = w < windows.size() && b >= windows[w].first;
        const double inc = inside ? detail::gauss5(s, a, b)
                                  : detail::plateau_sign(s, 0.5 * (a + b)) * (b - a);
        phi[i] = phi[i - 1] + inc;
    }
    return phi;
}

}  // namespace nfs
