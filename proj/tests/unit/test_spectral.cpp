#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nfs/model.hpp"
#include "nfs/spectral.hpp"

using Catch::Approx;
using namespace nfs;

namespace {
constexpr double kGamma = 1.0 / 141.0;

FieldRecord decay(double dt, double t_end, double rate, double beat = 0.0) {
    const auto n = static_cast<std::size_t>(std::lround(t_end / dt)) + 1;
    FieldRecord r{0.0, dt, std::vector<cplx>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        r.samples[i] = std::exp(-0.5 * rate * t) * std::cos(beat * t);
    }
    return r;
}

std::vector<double> range(double lo, double hi, double step) {
    std::vector<double> w;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) w.push_back(lo + static_cast<double>(i) * step);
    return w;
}

SpectrumRecord sampled(const std::vector<double>& w, auto&& f) {
    SpectrumRecord s;
    s.omega_over_gamma = w;
    for (double x : w) s.s_values.push_back(f(x));
    return s;
}
}  // namespace

TEST_CASE("exponential decay has a Lorentzian power spectrum") {
    const double g = 1.0;
    const auto rec = decay(0.002, 40.0, g);
    const std::vector<double> w{0.0, 0.25, 0.5, 1.0, 3.0};
    const auto f = dtft(rec, w);
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(std::norm(f[i]) == Approx(1.0 / (0.25 * g * g + w[i] * w[i])).epsilon(1e-4));
}

TEST_CASE("Parseval holds for dense wide grids") {
    const auto rec = decay(0.01, 3000.0, kGamma, 80.0 * kGamma);
    double energy = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i)
        energy += std::norm(rec.samples[i]) * rec.dt * ((i == 0 || i + 1 == rec.size()) ? 0.5 : 1.0);
    const double dw = 0.02 * kGamma;
    const std::size_t count = 40001;  // +-400 Gamma
    const auto f = dtft_uniform(rec, -400.0 * kGamma, dw, count);
    double spec = 0.0;
    for (const auto& z : f) spec += std::norm(z) * dw / (2.0 * std::numbers::pi);
    CHECK(spec == Approx(energy).epsilon(0.01));
}

TEST_CASE("chirp-z evaluation agrees with direct summation") {
    const auto rec = decay(0.005, 400.0, kGamma, 80.0 * kGamma);
    const auto w = range(-100.0 * kGamma, 100.0 * kGamma, 0.37 * kGamma);
    const auto direct = dtft(rec, w);
    const auto fast = dtft_uniform(rec, w.front(), 0.37 * kGamma, w.size());
    double peak = 0.0;
    for (const auto& z : direct) peak = std::max(peak, std::abs(z));
    for (std::size_t i = 0; i < w.size(); ++i) REQUIRE(std::abs(direct[i] - fast[i]) < 1e-8 * peak);
}

TEST_CASE("Gaussian normalization equals (sqrt(pi) tau)^2") {
    const auto in = gaussian_input(PulseConfig{}, GridConfig{0.005, 50.0, 8});
    CHECK(spectral_peak_power(in) == Approx(std::numbers::pi * 0.01).epsilon(1e-9));
    const auto shifted = gaussian_input(PulseConfig{3.0, 0.25}, GridConfig{0.005, 50.0, 8});
    CHECK(spectral_peak_power(shifted) == Approx(std::numbers::pi * 0.0625).epsilon(1e-9));
}

TEST_CASE("identity propagation gives S(0) = 1 and a symmetric spectrum") {
    const auto in = gaussian_input(PulseConfig{}, GridConfig{0.005, 100.0, 8});
    const auto w = range(-200.0, 200.0, 0.5);
    const auto s = normalized_spectrum(in, in, w, kGamma);
    CHECK(s.at(0.0) == Approx(1.0).epsilon(1e-9));
    CHECK(symmetry_error(s) < 1e-9);
    CHECK_FALSE(s.truncation_warning);
    const auto d = normalized_spectrum(in, in, w, kGamma, SpectrumMethod::direct);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(d.s_values[i] == Approx(s.s_values[i]).epsilon(1e-8));
}

TEST_CASE("spectrum is invariant under input rescaling") {
    const auto in = gaussian_input(PulseConfig{}, GridConfig{0.005, 300.0, 8});
    auto out = decay(0.005, 300.0, kGamma, 80.0 * kGamma);
    for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += in.samples[i];
    const auto w = range(-100.0, 100.0, 0.25);
    const auto s1 = normalized_spectrum(in, out, w, kGamma);
    auto in2 = in, out2 = out;
    const cplx alpha(3.0e3, -4.0e2);
    for (auto& z : in2.samples) z *= alpha;
    for (auto& z : out2.samples) z *= alpha;
    const auto s2 = normalized_spectrum(in2, out2, w, kGamma);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(s2.s_values[i] == Approx(s1.s_values[i]).epsilon(1e-12));
    CHECK(s1.truncation_warning);
}

TEST_CASE("peak metrics on a sampled Lorentzian") {
    const auto w = range(-20.0, 20.0, 0.05);
    const auto s = sampled(w, [](double x) { return 1.0 / (0.25 + (x - 0.013) * (x - 0.013)); });
    const auto p = peak_metrics(s, -5.0, 5.0);
    CHECK(p.fwhm == Approx(1.0).margin(0.01));
    CHECK(p.center == Approx(0.013).margin(0.003));
    CHECK(p.height == Approx(4.0).epsilon(0.01));
}

TEST_CASE("peak metrics recover a parabola exactly") {
    const auto w = range(0.0, 10.0, 0.1);
    const auto s = sampled(w, [](double x) { return 5.0 - (x - 4.237) * (x - 4.237); });
    const auto p = peak_metrics(s, 0.0, 10.0);
    CHECK(p.center == Approx(4.237).epsilon(1e-12));
    CHECK(p.height == Approx(5.0).epsilon(1e-12));
    CHECK(p.fwhm == Approx(2.0 * std::sqrt(2.5)).epsilon(1e-3));
}

TEST_CASE("peak metrics report missing peaks and crossings") {
    const auto w = range(0.0, 10.0, 0.1);
    const auto mono = sampled(w, [](double x) { return x; });
    CHECK_THROWS_AS(peak_metrics(mono, 0.0, 10.0), AnalysisError);
    const auto wide = sampled(w, [](double x) { return 1.0 / (1.0 + 0.01 * (x - 5.0) * (x - 5.0)); });
    CHECK_THROWS_AS(peak_metrics(wide, 3.0, 7.0), AnalysisError);
}

TEST_CASE("symmetry error detects asymmetric spectra") {
    const auto w = range(-10.0, 10.0, 0.5);
    const auto even = sampled(w, [](double x) { return 1.0 + x * x; });
    CHECK(symmetry_error(even) < 1e-15);
    const auto odd = sampled(w, [](double x) { return 2.0 + 0.1 * x; });
    CHECK(symmetry_error(odd) > 0.3);
}

TEST_CASE("spectrogram assembly sorts rows and checks grids") {
    const auto w = range(-1.0, 1.0, 0.5);
    const auto a = sampled(w, [](double x) { return x + 2.0; });
    const auto b = sampled(w, [](double x) { return 3.0 * x + 4.0; });
    const auto single = assemble_spectrogram({{1.0, a}});
    REQUIRE(single.s.size() == 1);
    CHECK(single.s[0] == a.s_values);
    const auto g = assemble_spectrogram({{6.6, b}, {4.2, a}});
    CHECK(g.params == std::vector<double>{4.2, 6.6});
    CHECK(g.s[1] == b.s_values);
    std::ostringstream os;
    write_spectrogram_csv(os, g);
    CHECK(os.str().rfind("param,omega_over_gamma,s\n4.2,-1,", 0) == 0);
    const auto other = sampled(range(-1.0, 1.0, 0.25), [](double) { return 1.0; });
    CHECK_THROWS_AS(assemble_spectrogram({{1.0, a}, {2.0, other}}), ConfigError);
}
