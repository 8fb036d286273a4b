// field_record.hpp - uniformly sampled complex field envelope
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nfs/errors.hpp"

namespace nfs {

using cplx = std::complex<double>;

/// Complex Rabi-frequency envelope Omega(t) on a uniform time grid (ns).
struct FieldRecord {
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<cplx> samples;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
    double t_end() const { return samples.empty() ? t_start : time(samples.size() - 1); }

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw ConfigError("field record: dt must be positive and finite");
        if (samples.size() < 2)
            throw ConfigError("field record: at least two samples required");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag()))
                throw NumericalError("field record: non-finite sample at t = " +
                                     std::to_string(time(i)) + " ns");
        }
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : samples) m = std::max(m, std::abs(z));
        return m;
    }

    /// |Omega(t_end)| / max |Omega|; spectra need this below 1e-2.
    double tail_ratio() const {
        const double m = max_abs();
        return m > 0.0 ? std::abs(samples.back()) / m : 0.0;
    }

    bool same_grid(const FieldRecord& other) const {
        return samples.size() == other.samples.size() && t_start == other.t_start &&
               dt == other.dt;
    }
};

inline double l2_norm(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

/// ||a - b|| / ||b|| over the common sample range.
inline double relative_l2(const FieldRecord& a, const FieldRecord& b) {
    const std::size_t n = std::min(a.size(), b.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += std::norm(a.samples[i] - b.samples[i]);
        den += std::norm(b.samples[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Same as relative_l2 but restricted to t in [t_lo, t_hi].
inline double relative_l2(const FieldRecord& a, const FieldRecord& b, double t_lo, double t_hi) {
    const std::size_t n = std::min(a.size(), b.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = b.time(i);
        if (t < t_lo || t > t_hi) continue;
        num += std::norm(a.samples[i] - b.samples[i]);
        den += std::norm(b.samples[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace nfs
