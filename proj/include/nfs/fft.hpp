// fft.hpp - thin RAII wrapper over FFTW plus causal convolution helpers
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstring>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "nfs/field_record.hpp"

namespace nfs {

namespace detail {
// FFTW planning is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// In-place 1-D complex transform of fixed size.
/// `sign` = FFTW_FORWARD computes sum x_n e^{-2 pi i k n / N}, FFTW_BACKWARD uses e^{+...}.
class FftPlan {
public:
    FftPlan(std::size_t n, int sign) : n_(n) {
        std::lock_guard lock(detail::fftw_planner_mutex());
        buf_ = fftw_alloc_complex(n);
        if (!buf_) throw std::bad_alloc();
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, sign, FFTW_ESTIMATE);
        if (!plan_) {
            fftw_free(buf_);
            throw std::runtime_error("fftw: planning failed");
        }
    }
    ~FftPlan() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    std::size_t size() const { return n_; }

    /// Transforms `data` (zero padded to size()) and returns all N outputs.
    std::vector<cplx> execute(std::span<const cplx> data) {
        std::memset(buf_, 0, sizeof(fftw_complex) * n_);
        const std::size_t m = std::min(data.size(), n_);
        for (std::size_t i = 0; i < m; ++i) {
            buf_[i][0] = data[i].real();
            buf_[i][1] = data[i].imag();
        }
        fftw_execute(plan_);
        std::vector<cplx> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = {buf_[i][0], buf_[i][1]};
        return out;
    }

private:
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan plan_ = nullptr;
};

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

enum class ConvolutionMethod { transform, direct };

/// c[n] = sum_{m=0}^{n} a[n-m] b[m] for n < n_out.
inline std::vector<cplx> discrete_convolution(std::span<const cplx> a, std::span<const cplx> b,
                                              std::size_t n_out,
                                              ConvolutionMethod method = ConvolutionMethod::transform) {
    std::vector<cplx> c(n_out);
    if (a.empty() || b.empty() || n_out == 0) return c;
    if (method == ConvolutionMethod::direct) {
        for (std::size_t n = 0; n < n_out; ++n) {
            cplx acc{};
            const std::size_t mlo = n >= a.size() ? n - a.size() + 1 : 0;
            const std::size_t mhi = std::min(n, b.size() - 1);
            for (std::size_t m = mlo; m <= mhi; ++m) acc += a[n - m] * b[m];
            c[n] = acc;
        }
        return c;
    }
    // Only the first n_out outputs are needed, so longer inputs can be cut there.
    const auto a_cut = a.subspan(0, std::min(a.size(), n_out));
    const auto b_cut = b.subspan(0, std::min(b.size(), n_out));
    const std::size_t len = next_pow2(a_cut.size() + b_cut.size() - 1);
    FftPlan fwd(len, FFTW_FORWARD), inv(len, FFTW_BACKWARD);
    const auto fa = fwd.execute(a_cut);
    const auto fb = fwd.execute(b_cut);
    std::vector<cplx> prod(len);
    for (std::size_t i = 0; i < len; ++i) prod[i] = fa[i] * fb[i];
    const auto r = inv.execute(prod);
    const double scale = 1.0 / static_cast<double>(len);
    for (std::size_t n = 0; n < n_out; ++n) c[n] = r[n] * scale;
    return c;
}

/// Trapezoidal approximation of integral_0^t K(t - t') f(t') dt' on a uniform grid.
inline std::vector<cplx> causal_convolution(std::span<const cplx> kernel, std::span<const cplx> f,
                                            double dt,
                                            ConvolutionMethod method = ConvolutionMethod::transform) {
    const std::size_t n = f.size();
    auto c = discrete_convolution(kernel, f, n, method);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx ki = i < kernel.size() ? kernel[i] : cplx{};
        c[i] = dt * (c[i] - 0.5 * ki * f[0] - 0.5 * kernel[0] * f[i]);
    }
    return c;
}

}  // namespace nfs
