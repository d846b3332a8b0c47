#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "thermoscope/thermal_model.hpp"

using namespace thermoscope;

namespace {

ThermalConfig quick_config() {
    ThermalConfig c;
    c.n_grid = 81;
    c.latent_heats.clear();
    c.max_steps = 200;
    return c;
}

}  // namespace

TEST_CASE("constant wall at the initial temperature stays in equilibrium") {
    ThermalConfig c = quick_config();
    c.wall_schedule = {{0.0, 20.0}};
    c.center_stop_temp_c = 1.0e9;
    c.max_steps = 20;
    const ProfileSeries s = solve_heating(c);
    REQUIRE(s.steps() == 20);
    for (const auto& row : s.temps) {
        for (double v : row) REQUIRE(v == doctest::Approx(20.0).epsilon(1e-12));
    }
}

TEST_CASE("uniform Dirichlet hold relaxes to the wall temperature") {
    ThermalConfig c = quick_config();
    c.wall_schedule = {{0.0, 180.0}};
    c.center_stop_temp_c = 1.0e9;
    c.step_interval_s = 3600.0;
    c.max_steps = 30;  // 29 h, many diffusion time constants
    const ProfileSeries s = solve_heating(c);
    const auto& last = s.temps.back();
    for (double v : last) CHECK(v == doctest::Approx(180.0).epsilon(0.1 / 180.0));
}

TEST_CASE("wall step response matches the Bessel series at the center") {
    ThermalConfig c;
    c.n_grid = 201;
    c.latent_heats.clear();
    c.t_initial_c = 20.0;
    c.wall_schedule = {{0.0, 180.0}};
    c.center_stop_temp_c = 1.0e9;
    c.step_interval_s = 600.0;
    c.max_steps = 16;
    c.max_substep_s = 2.0;
    const ProfileSeries s = solve_heating(c);

    for (int step : {3, 8, 15}) {
        const double t = s.times_s[step];
        const double expected = oracles::cylinder_step_response(0.0, t, c.inner_radius_m,
                                                                c.diffusivity_m2_s, 20.0, 180.0);
        CAPTURE(step);
        CHECK(std::abs(s.temps[step][0] - expected) < 0.5);
    }
}

TEST_CASE("maximum principle without latent heat") {
    ThermalConfig c = quick_config();
    c.max_steps = 60;
    c.center_stop_temp_c = 1.0e9;
    const ProfileSeries s = solve_heating(c);
    for (const auto& row : s.temps) {
        for (double v : row) {
            REQUIRE(v >= 20.0 - 1e-9);
            REQUIRE(v <= 180.0 + 1e-9);
        }
    }
}

TEST_CASE("non-decreasing wall schedule gives non-decreasing wall temperature") {
    ThermalConfig c = quick_config();
    c.max_steps = 80;
    c.center_stop_temp_c = 1.0e9;
    const ProfileSeries s = solve_heating(c);
    const int wall = s.n_grid() - 1;
    for (int step = 1; step < s.steps(); ++step) {
        REQUIRE(s.temps[step][wall] >= s.temps[step - 1][wall] - 1e-9);
    }
}

TEST_CASE("grid convergence: doubling n_grid moves the final profile < 0.2 C") {
    ThermalConfig c;
    c.latent_heats.clear();
    c.center_stop_temp_c = 1.0e9;
    c.max_steps = 60;
    c.n_grid = 101;
    const ProfileSeries coarse = solve_heating(c);
    c.n_grid = 201;
    const ProfileSeries fine = solve_heating(c);

    double max_diff = 0.0;
    for (int j = 0; j < coarse.n_grid(); ++j) {
        const double r = coarse.r_grid[j];
        max_diff = std::max(max_diff,
                            std::abs(coarse.temps.back()[j] -
                                     fine.temp_at(fine.steps() - 1, r)));
    }
    CHECK(max_diff < 0.2);
}

TEST_CASE("symmetry at the axis: one-sided gradient below 0.1 C/mm") {
    ThermalConfig c = quick_config();
    c.n_grid = 201;
    c.max_steps = 100;
    c.center_stop_temp_c = 1.0e9;
    const ProfileSeries s = solve_heating(c);
    const double h_mm = (s.r_grid[1] - s.r_grid[0]) * 1e3;
    for (int step = 0; step < s.steps(); step += 10) {
        const double grad = std::abs(s.temps[step][1] - s.temps[step][0]) / h_mm;
        REQUIRE(grad < 0.1);
    }
}

TEST_CASE("latent heat produces a reduced-slope plateau near the melt temperature") {
    ThermalConfig base;
    base.center_stop_temp_c = 100.0;

    auto steps_in_melt_band = [](const ProfileSeries& s) {
        int n = 0;
        for (int step = 0; step < s.steps(); ++step) {
            if (s.temps[step][0] >= 77.0 && s.temps[step][0] <= 83.0) ++n;
        }
        return n;
    };

    ThermalConfig no_latent = base;
    no_latent.latent_heats.clear();
    const int with_plateau = steps_in_melt_band(solve_heating(base));
    const int without_plateau = steps_in_melt_band(solve_heating(no_latent));
    CAPTURE(with_plateau);
    CAPTURE(without_plateau);
    CHECK(with_plateau >= 2 * without_plateau);
}

TEST_CASE("interpolate_profile identities") {
    ProfileSeries s;
    const int n = 11;
    s.r_grid.resize(n);
    for (int j = 0; j < n; ++j) s.r_grid[j] = 0.072 * j / static_cast<double>(n - 1);
    std::vector<double> linear(n);
    for (int j = 0; j < n; ++j) linear[j] = 20.0 + 100.0 * s.r_grid[j] / 0.072;
    s.temps = {linear};
    s.times_s = {0.0};

    SUBCASE("matching uniform grid returns the row unchanged") {
        const auto out = interpolate_profile(s, 0, n);
        for (int j = 0; j < n; ++j) REQUIRE(out[j] == doctest::Approx(linear[j]).epsilon(1e-12));
    }
    SUBCASE("n_pts = 2 gives the endpoints") {
        const auto out = interpolate_profile(s, 0, 2);
        REQUIRE(out.size() == 2);
        CHECK(out[0] == doctest::Approx(20.0));
        CHECK(out[1] == doctest::Approx(120.0));
    }
    SUBCASE("linear data is reproduced exactly at any resolution") {
        for (int n_pts : {5, 7, 25, 50}) {
            const auto out = interpolate_profile(s, 0, n_pts);
            for (int i = 0; i < n_pts; ++i) {
                const double r = 0.072 * i / static_cast<double>(n_pts - 1);
                REQUIRE(out[i] == doctest::Approx(20.0 + 100.0 * r / 0.072).epsilon(1e-12));
            }
        }
    }
    SUBCASE("step out of range") {
        CHECK_THROWS_AS(interpolate_profile(s, 1, 5), std::invalid_argument);
        CHECK_THROWS_AS(interpolate_profile(s, -1, 5), std::invalid_argument);
    }
}

TEST_CASE("config validation") {
    ThermalConfig c;
    c.n_grid = 5;
    CHECK_THROWS_AS(solve_heating(c), std::invalid_argument);
    c = ThermalConfig{};
    c.diffusivity_m2_s = -1.0;
    CHECK_THROWS_AS(solve_heating(c), std::invalid_argument);
    c = ThermalConfig{};
    c.wall_schedule = {{0.0, 20.0}, {0.0, 30.0}};
    CHECK_THROWS_AS(solve_heating(c), std::invalid_argument);
}
