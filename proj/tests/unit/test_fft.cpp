#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nfs/fft.hpp"

using Catch::Approx;
using namespace nfs;

TEST_CASE("transform and direct convolution agree") {
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    for (auto [na, nb, nout] : {std::tuple{17, 33, 40}, {100, 100, 100}, {1, 5, 5}, {300, 20, 500}}) {
        std::vector<cplx> a(na), b(nb);
        for (auto& z : a) z = {g(rng), g(rng)};
        for (auto& z : b) z = {g(rng), g(rng)};
        const auto t = discrete_convolution(a, b, nout, ConvolutionMethod::transform);
        const auto d = discrete_convolution(a, b, nout, ConvolutionMethod::direct);
        REQUIRE(t.size() == static_cast<std::size_t>(nout));
        double err = 0.0, ref = 0.0;
        for (int i = 0; i < nout; ++i) {
            err = std::max(err, std::abs(t[i] - d[i]));
            ref = std::max(ref, std::abs(d[i]));
        }
        CHECK(err <= 1e-12 * ref);
    }
    CHECK(discrete_convolution(std::vector<cplx>{}, std::vector<cplx>{1.0}, 3).size() == 3);
}

TEST_CASE("causal convolution integrates exactly for linear integrands") {
    const double dt = 0.01;
    const std::size_t n = 1001;
    std::vector<cplx> k(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = 1.0;
        f[i] = 2.0 + 3.0 * static_cast<double>(i) * dt;
    }
    for (auto m : {ConvolutionMethod::transform, ConvolutionMethod::direct}) {
        const auto c = causal_convolution(k, f, dt, m);
        for (std::size_t i = 0; i < n; i += 50) {
            const double t = static_cast<double>(i) * dt;
            CHECK(c[i].real() == Approx(2.0 * t + 1.5 * t * t).margin(1e-10));
        }
    }
}

TEST_CASE("causal convolution is second-order accurate") {
    // integral_0^t e^{-(t-s)} cos(s) ds = (cos t + sin t - e^{-t}) / 2
    auto max_err = [](double dt) {
        const auto n = static_cast<std::size_t>(std::lround(10.0 / dt)) + 1;
        std::vector<cplx> k(n), f(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * dt;
            k[i] = std::exp(-t);
            f[i] = std::cos(t);
        }
        const auto c = causal_convolution(k, f, dt);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * dt;
            e = std::max(e, std::abs(c[i].real() - 0.5 * (std::cos(t) + std::sin(t) - std::exp(-t))));
        }
        return e;
    };
    const double e1 = max_err(0.02), e2 = max_err(0.01);
    CHECK(e1 < 1e-4);
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.05));
}

TEST_CASE("forward then backward transform returns N times the input") {
    const std::size_t n = 64;
    FftPlan fwd(n, FFTW_FORWARD), inv(n, FFTW_BACKWARD);
    std::vector<cplx> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = {std::sin(0.3 * i), std::cos(0.7 * i)};
    const auto y = inv.execute(fwd.execute(x));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] / static_cast<double>(n) - x[i]) < 1e-13);
    CHECK(next_pow2(1) == 1);
    CHECK(next_pow2(1025) == 2048);
}
