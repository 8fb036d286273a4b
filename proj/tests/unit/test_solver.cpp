#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "nfs/analytic_response.hpp"
#include "nfs/obe_solver.hpp"
#include "nfs/switching.hpp"

using Catch::Approx;
using namespace nfs;

namespace {
const NuclearConstants kC{};

TargetConfig target(double xi, double delta_over_gamma, SwitchSchedule s = {}, bool electronic = false) {
    return {xi, 10e-6, delta_over_gamma, electronic, std::move(s)};
}

Excitation excitation_of(const FieldRecord& f) { return Excitation::from_record(f); }

ResponseParams response_of(const TargetConfig& t) {
    return {t.xi, kC.gamma, angular_detuning(t.delta_over_gamma, kC), t.schedule, cplx(1.0)};
}
}  // namespace

TEST_CASE("free coherence decays and rotates") {
    SlabState s(3);
    s.rho31 = {1.0, cplx(0.0, 2.0), 0.5};
    s.rho42 = {1.0, -1.0, 0.0};
    const std::vector<cplx> zero(3);
    const double delta = angular_detuning(80.0, kC), dt = 0.005;
    const auto next = step_coherences(s, zero, delta, SwitchSchedule{}, 0.0, kC.gamma, kC.cg_a, dt);
    const cplx f31 = std::exp(-cplx(0.5 * kC.gamma, delta) * dt);
    const cplx f42 = std::exp(-cplx(0.5 * kC.gamma, -delta) * dt);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(next.rho31[i] - s.rho31[i] * f31) <= 1e-10 * std::abs(s.rho31[i]) + 1e-300);
        CHECK(std::abs(next.rho42[i] - s.rho42[i] * f42) <= 1e-10 * std::abs(s.rho42[i]) + 1e-300);
    }
}

TEST_CASE("constant drive relaxes to i a Omega / (2 Gamma)") {
    SlabState s(1);
    const std::vector<cplx> omega{cplx(0.7, -0.2)};
    for (int n = 0; n < 8000; ++n)
        s = step_coherences(s, omega, 0.0, SwitchSchedule{}, n * 1.0, kC.gamma, kC.cg_a, 1.0);
    const cplx expected = cplx(0.0, 1.0) * kC.cg_a * omega[0] / (2.0 * kC.gamma);
    CHECK(std::abs(s.rho31[0] - expected) < 1e-8 * std::abs(expected));
    CHECK(std::abs(s.rho42[0] - expected) < 1e-8 * std::abs(expected));
}

TEST_CASE("coherence step is linear in the drive") {
    SlabState s(2);
    const std::vector<cplx> a{1.0, cplx(0.3, 0.1)}, b{2.0, cplx(0.6, 0.2)};
    const SwitchSchedule sw{{0.01}, 2.0};
    const auto x = step_coherences(s, a, 0.5, sw, 0.0, kC.gamma, kC.cg_a, 0.005);
    const auto y = step_coherences(s, b, 0.5, sw, 0.0, kC.gamma, kC.cg_a, 0.005);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(y.rho31[i] == 2.0 * x.rho31[i]);
        CHECK(y.rho42[i] == 2.0 * x.rho42[i]);
    }
}

TEST_CASE("non-finite coherence is reported with slab and time") {
    SlabState s(4);
    std::vector<cplx> omega(4);
    omega[2] = std::numeric_limits<double>::quiet_NaN();
    try {
        step_coherences(s, omega, 0.1, SwitchSchedule{}, 1.5, kC.gamma, kC.cg_a, 0.01);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("slab 2") != std::string::npos);
        CHECK(std::string(e.what()).find("1.5") != std::string::npos);
    }
}

TEST_CASE("transport examples") {
    SlabState s(16);
    const auto vac = make_coefficients(target(0.0, 80.0), kC, 16);
    CHECK(transport_field(s, cplx(0.3, 0.4), vac).exit == cplx(0.3, 0.4));

    const auto el = make_coefficients(target(0.0, 80.0, {}, true), kC, 16);
    const double att = std::abs(transport_field(s, 1.0, el).exit);
    CHECK(att == Approx(std::exp(-kC.k_xray * 9.13e-8 * 10e-6)).epsilon(1e-6));
    CHECK(att == Approx(0.9355).epsilon(1e-4));
    CHECK(el.electronic_term.real() < 0.0);

    const auto res = make_coefficients(target(15.0, 80.0), kC, 16);
    const cplx src(0.01, -0.02);
    for (std::size_t i = 0; i < 16; ++i) {
        s.rho31[i] = 0.25 * src;
        s.rho42[i] = 0.75 * src;
    }
    const auto r = transport_field(s, 1.0, res);
    const cplx expected = 1.0 + cplx(0.0, 1.0) * res.eta * src * 10e-6;
    CHECK(std::abs(r.exit - expected) < 1e-13);
    CHECK(r.faces.size() == 17);
    CHECK(r.faces.front() == 1.0);
}

TEST_CASE("zero thickness leaves the field unchanged") {
    const GridConfig g{0.005, 20.0, 16};
    const auto in = gaussian_input(PulseConfig{}, g);
    const auto out = run_target(in, target(0.0, 80.0), kC, g);
    CHECK(relative_l2(out, in) < 1e-12);
    const auto out2 = run_target(PulseConfig{}, target(0.0, 80.0), kC, g);
    CHECK(relative_l2(out2, in) < 1e-12);
}

TEST_CASE("real input gives real output") {
    const GridConfig g{0.005, 100.0, 32};
    const SwitchSchedule s{{3.27}, 2.0};
    const std::vector<TargetConfig> ts{target(15.0, 80.0, s), target(15.0, 80.0)};
    const auto out = run_chain(PulseConfig{}, ts, kC, g);
    double worst = 0.0;
    for (const auto& z : out.samples) worst = std::max(worst, std::abs(z.imag()));
    CHECK(worst < 1e-8 * out.max_abs());
}

TEST_CASE("second target of zero thickness matches the single-target run") {
    const GridConfig g{0.005, 60.0, 32};
    const std::vector<TargetConfig> one{target(15.0, 80.0)};
    const std::vector<TargetConfig> two{target(15.0, 80.0), target(0.0, 80.0)};
    CHECK(relative_l2(run_chain(PulseConfig{}, two, kC, g), run_chain(PulseConfig{}, one, kC, g)) < 1e-12);
}

TEST_CASE("solver is linear in the input") {
    const GridConfig g{0.005, 60.0, 32};
    const std::vector<TargetConfig> ts{target(15.0, 80.0, {{3.27}, 2.0}), target(5.0, 80.0)};
    const auto a = gaussian_input(PulseConfig{0.67, 0.1}, g);
    const auto b = gaussian_input(PulseConfig{1.5, 0.2}, g);
    const cplx alpha(0.7, -1.3), beta(-2.1, 0.4);
    FieldRecord mix = a;
    for (std::size_t i = 0; i < mix.size(); ++i) mix.samples[i] = alpha * a.samples[i] + beta * b.samples[i];
    const auto ra = run_chain(a, ts, kC, g), rb = run_chain(b, ts, kC, g), rm = run_chain(mix, ts, kC, g);
    FieldRecord comb = ra;
    for (std::size_t i = 0; i < comb.size(); ++i) comb.samples[i] = alpha * ra.samples[i] + beta * rb.samples[i];
    CHECK(relative_l2(rm, comb) < 1e-10);

    FieldRecord big = a;
    for (auto& z : big.samples) z *= 1e3;
    const auto rbig = run_chain(big, ts, kC, g);
    FieldRecord scaled = ra;
    for (auto& z : scaled.samples) z *= 1e3;
    CHECK(relative_l2(rbig, scaled) < 1e-13);
}

TEST_CASE("passive medium does not create energy") {
    const GridConfig g{0.005, 400.0, 32};
    const std::vector<TargetConfig> ts{target(15.0, 80.0, {}, true), target(15.0, 80.0, {}, true)};
    const auto in = gaussian_input(PulseConfig{}, g);
    const auto out = run_chain(PulseConfig{}, ts, kC, g);
    CHECK(l2_norm(out.samples) < l2_norm(in.samples));
}

TEST_CASE("solver matches the analytic response for an unperturbed chain") {
    const GridConfig g{0.005, 200.0, 64};
    const auto in = gaussian_input(PulseConfig{}, g);
    const std::vector<TargetConfig> ts{target(15.0, 80.0), target(15.0, 80.0)};
    const auto pde = run_chain(PulseConfig{}, ts, kC, g);
    const auto ana = scattered_field_two_target(response_of(ts[0]), response_of(ts[1]), excitation_of(in));
    CHECK(relative_l2(ana.smooth, pde) < 2e-3);
    const auto pde1 = run_target(PulseConfig{}, ts[0], kC, g);
    const auto ana1 = scattered_field_one_target(response_of(ts[0]), excitation_of(in));
    CHECK(relative_l2(ana1.smooth, pde1) < 2e-3);
}

TEST_CASE("perturbed analytic model tracks the solver for a switch at a node") {
    const GridConfig g{0.005, 150.0, 64};
    const auto in = gaussian_input(PulseConfig{}, g);
    const std::vector<TargetConfig> plain{target(15.0, 80.0), target(15.0, 80.0)};
    const double t1 = detect_nodes(run_chain(PulseConfig{}, plain, kC, g), 1.17).front();
    const SwitchSchedule s{{t1}, 2.0};
    const std::vector<TargetConfig> ts{target(15.0, 80.0, s), target(15.0, 80.0, s)};
    const auto pde = run_chain(PulseConfig{}, ts, kC, g);
    const auto ana = scattered_field_two_target(response_of(ts[0]), response_of(ts[1]), excitation_of(in));
    CHECK(relative_l2(ana.smooth, pde, 0.0, 150.0) < 0.05);
}

TEST_CASE("halving dt and doubling slabs changes the output little") {
    const std::vector<TargetConfig> ts{target(15.0, 80.0, {{3.27}, 2.0}), target(15.0, 80.0, {{3.27}, 2.0})};
    const auto coarse = run_chain(PulseConfig{}, ts, kC, GridConfig{0.01, 100.0, 32});
    const auto fine = run_chain(PulseConfig{}, ts, kC, GridConfig{0.005, 100.0, 64});
    FieldRecord sub{0.0, 0.01, {}};
    for (std::size_t i = 0; i < fine.size(); i += 2) sub.samples.push_back(fine.samples[i]);
    CHECK(relative_l2(coarse, sub) < 5e-3);
}

TEST_CASE("input record must be on the solver grid") {
    const GridConfig g{0.005, 20.0, 16};
    const auto in = gaussian_input(PulseConfig{}, GridConfig{0.005, 10.0, 16});
    CHECK_THROWS_AS(run_target(in, target(1.0, 80.0), kC, g), ConfigError);
}
