#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nfs/experiments.hpp"

using Catch::Approx;
using namespace nfs;

namespace {

ScenarioConfig small(double xi, double delta_over_gamma, int n_targets = 2) {
    ScenarioConfig c;
    c.grid = {0.01, 300.0, 16};
    c.spectrum.omega_min = -120.0;
    c.spectrum.omega_max = 120.0;
    c.spectrum.omega_step = 0.25;
    for (int i = 0; i < n_targets; ++i) c.targets.push_back({xi, 10e-6, delta_over_gamma, false, {}});
    return c;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("nfs_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string body(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("no-target scenario has S(0) = 1") {
    auto c = small(0.0, 0.0, 0);
    c.grid.t_end = 20.0;
    const auto r = simulate(c);
    CHECK(r.spectrum.at(0.0) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("plans expand into explicit schedules") {
    auto c = small(15.0, 80.0);
    c.plan.kind = ScheduleKind::delayed;
    c.plan.t1 = 3.28;
    c.plan.tau_d = 4.2;
    auto r = resolve_schedules(c);
    CHECK(r.config.targets[0].schedule.switch_times == std::vector<double>{3.28});
    CHECK(r.config.targets[1].schedule.switch_times[0] == Approx(7.48));

    c.plan.kind = ScheduleKind::simultaneous;
    c.plan.t1.reset();
    r = resolve_schedules(c);
    REQUIRE(r.t1);
    CHECK(*r.t1 == Approx(3.27).margin(0.02));
    CHECK(r.config.targets[1].schedule.switch_times == std::vector<double>{*r.t1});

    c.plan.kind = ScheduleKind::nodes;
    c.plan.n_switches = 3;
    r = resolve_schedules(c);
    const auto& s = r.config.targets[0].schedule.switch_times;
    REQUIRE(s.size() == 3);
    CHECK(s[0] == Approx(3.27 + 5.537).margin(0.05));
    CHECK(s[1] - s[0] == Approx(5.537).margin(0.05));
    CHECK(r.config.targets[1].schedule == r.config.targets[0].schedule);
}

TEST_CASE("iterative node placement reproduces the early nodes") {
    auto c = small(15.0, 80.0);
    c.grid.t_end = 60.0;
    c.plan.kind = ScheduleKind::nodes;
    c.plan.n_switches = 3;
    const auto plain = resolve_schedules(c).config.targets[0].schedule.switch_times;
    c.plan.iterative_nodes = true;
    const auto iter = resolve_schedules(c).config.targets[0].schedule.switch_times;
    REQUIRE(iter.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(iter[k] == Approx(plain[k]).margin(0.1));
}

TEST_CASE("run_scenario writes deterministic outputs") {
    auto c = small(15.0, 80.0);
    c.plan.kind = ScheduleKind::simultaneous;
    c.plan.t1 = 3.27;
    c.spectrum.peak_windows = {{60.0, 100.0}};
    const auto d1 = scratch("run1"), d2 = scratch("run2");
    const auto m1 = run_scenario(c, d1);
    const auto m2 = run_scenario(c, d2);
    for (const auto* f : {"field.csv", "spectrum.csv", "peaks.json", "manifest.json"})
        CHECK(std::filesystem::exists(d1 / f));
    for (const auto* f : {"field.csv", "spectrum.csv", "peaks.json"}) CHECK(body(d1 / f) == body(d2 / f));
    CHECK(m1.config_hash == m2.config_hash);
    CHECK(body(d1 / "field.csv").rfind("# config_hash=" + m1.config_hash + "\nt_ns,re_omega,im_omega\n", 0) == 0);
    const auto peaks = nlohmann::json::parse(body(d1 / "peaks.json"));
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0]["height"].get<double>() > 1.0);
    CHECK(peaks[0].contains("fwhm"));
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}

TEST_CASE("unwritable output directory is an I/O error") {
    auto c = small(0.0, 0.0, 0);
    c.grid.t_end = 10.0;
    CHECK_THROWS_AS(run_scenario(c, "/proc/nfs_no_such_dir/x"), IoError);
}

TEST_CASE("sweep values parse as lists or ranges") {
    CHECK(parse_sweep_values("1,2.5,4") == std::vector<double>{1.0, 2.5, 4.0});
    const auto r = parse_sweep_values("0:1:0.25");
    REQUIRE(r.size() == 5);
    CHECK(r.back() == Approx(1.0));
    CHECK_THROWS_AS(parse_sweep_values("1:0:0.5"), ConfigError);
    CHECK_THROWS_AS(parse_sweep_values("a,b"), ConfigError);
    CHECK(parse_sweep_parameter("nswitch") == SweepParameter::n_switches);
    CHECK_THROWS_AS(parse_sweep_parameter("xi"), ConfigError);
}

TEST_CASE("sweep rows equal standalone runs") {
    auto c = small(15.0, 80.0);
    c.plan.kind = ScheduleKind::delayed;
    c.plan.t1 = 3.28;
    const SweepSpec spec{SweepParameter::tau_d, {4.2, 6.6}, c};
    const auto dir = scratch("sweep");
    const auto sweep = sweep_tau_d(spec, dir);
    REQUIRE(sweep.points.size() == 2);
    for (const auto& p : sweep.points) {
        REQUIRE(p.result);
        auto single = c;
        single.plan.tau_d = p.value;
        const auto r = simulate(single);
        for (std::size_t i = 0; i < r.spectrum.size(); ++i)
            REQUIRE(p.result->spectrum.s_values[i] == Approx(r.spectrum.s_values[i]).epsilon(1e-12));
    }
    CHECK(std::filesystem::exists(dir / "spectrogram.csv"));
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    std::filesystem::remove_all(dir);

    auto bad = c;
    bad.plan.kind = ScheduleKind::simultaneous;
    CHECK_THROWS_AS(sweep_tau_d({SweepParameter::tau_d, {1.0}, bad}), ConfigError);
}

TEST_CASE("sweep points fail independently") {
    auto c = small(15.0, 80.0);
    c.plan.kind = ScheduleKind::delayed;
    c.plan.t1 = 3.28;
    const auto r = sweep_tau_d({SweepParameter::tau_d, {-5.0, 1.0}, c});
    CHECK_FALSE(r.points[0].result);
    CHECK_FALSE(r.points[0].error.empty());
    CHECK(r.points[1].result);
    CHECK(r.diagnostics.size() == 1);
}

TEST_CASE("switch-count sweep starts near the transparent baseline") {
    auto c = small(15.0, 80.0);
    c.plan.kind = ScheduleKind::nodes;
    const auto rows = sweep_switch_count({SweepParameter::n_switches, {0, 1, 2}, c});
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) REQUIRE(r.error.empty());
    CHECK(rows[0].s0 == Approx(1.0).margin(0.05));
    CHECK(rows[1].s0 > rows[0].s0);
    CHECK(rows[2].s0 > rows[1].s0);
    const auto over = sweep_switch_count({SweepParameter::n_switches, {5}, c}, std::nullopt, 20.0);
    CHECK_FALSE(over[0].error.empty());
}

TEST_CASE("delta sweep places the switch at each first node") {
    auto c = small(30.0, 80.0);
    c.plan.kind = ScheduleKind::downstream_only;
    const auto rows = sweep_delta({SweepParameter::delta_over_gamma, {60.0, 100.0}, c});
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.type == 3);
        CHECK(r.max_s > 3.0);
        CHECK(std::isfinite(r.t1));
    }
    CHECK(rows[1].t1 < rows[0].t1);
}

TEST_CASE("modulation depth is the per-frequency spread") {
    Spectrogram g{{0.0, 1.0}, {-1.0, 0.0, 1.0}, {{1.0, 5.0, 2.0}, {3.0, 4.0, 2.0}}};
    CHECK(modulation_depth(g) == std::vector<double>{2.0, 1.0, 0.0});
}
