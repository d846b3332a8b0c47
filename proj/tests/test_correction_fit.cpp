#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "thermoscope/correction_fit.hpp"
#include "thermoscope/errors.hpp"
#include "thermoscope/rng.hpp"
#include "thermoscope/thermal_model.hpp"

using namespace thermoscope;

namespace {

// short heating run with enough curvature for the time warp to be observable
ProfileSeries test_series() {
    ThermalConfig c;
    c.n_grid = 61;
    c.wall_schedule = {{0.0, 20.0}, {3600.0, 180.0}};
    c.center_stop_temp_c = 150.0;
    c.max_steps = 120;
    return solve_heating(c);
}

ProfileSeries constant_series(double temp, int steps, int n_grid = 11) {
    ProfileSeries s;
    s.r_grid.resize(n_grid);
    for (int j = 0; j < n_grid; ++j) s.r_grid[j] = 0.072 * j / static_cast<double>(n_grid - 1);
    for (int i = 0; i < steps; ++i) {
        s.temps.push_back(std::vector<double>(n_grid, temp));
        s.times_s.push_back(120.0 * i);
    }
    return s;
}

BoundaryRecord boundary_from(const ProfileSeries& s) {
    BoundaryRecord rec;
    for (int step = 0; step < s.steps(); ++step) {
        rec.steps.push_back(step);
        rec.t_center_c.push_back(s.temps[step][0]);
        rec.t_wall_c.push_back(s.temps[step][s.n_grid() - 1]);
    }
    return rec;
}

}  // namespace

TEST_CASE("apply_correction: identity leaves the series unchanged") {
    const ProfileSeries s = test_series();
    const ProfileSeries out = apply_correction(s, CorrectionParams::identity());
    for (int step = 0; step < s.steps(); ++step) {
        for (int j = 0; j < s.n_grid(); ++j) {
            REQUIRE(out.temps[step][j] == doctest::Approx(s.temps[step][j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_correction: uniform scale and shift arithmetic") {
    const ProfileSeries s = constant_series(110.0, 5);
    CorrectionParams p;
    p.a0 = p.aR = 2.0;
    p.b0 = p.bR = 10.0;
    const ProfileSeries out = apply_correction(s, p);
    for (const auto& row : out.temps) {
        for (double v : row) REQUIRE(v == doctest::Approx(200.0).epsilon(1e-12));
    }
}

TEST_CASE("apply_correction: scale interpolates linearly in radius") {
    const ProfileSeries s = constant_series(1.0, 3, 21);
    CorrectionParams p;
    p.a0 = 1.0;
    p.aR = 3.0;
    const ProfileSeries out = apply_correction(s, p);
    const int mid = 10;  // r = R/2
    CHECK(out.temps[0][mid] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(out.temps[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.temps[0][20] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("apply_correction: composition with identity and step-subset commutation") {
    const ProfileSeries s = test_series();
    CorrectionParams p;
    p.a0 = 1.1;
    p.b0 = -2.0;
    p.aR = 0.9;
    p.bR = 3.0;
    const ProfileSeries once = apply_correction(s, p);
    const ProfileSeries twice = apply_correction(apply_correction(s, CorrectionParams::identity()), p);
    for (int step = 0; step < s.steps(); ++step) {
        for (int j = 0; j < s.n_grid(); ++j) {
            REQUIRE(twice.temps[step][j] == doctest::Approx(once.temps[step][j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_correction with c=1, d=0 commutes with step-subset restriction") {
    const ProfileSeries s = test_series();
    CorrectionParams p;
    p.a0 = 1.07;
    p.b0 = 1.5;
    p.aR = 0.94;
    p.bR = -2.5;
    const ProfileSeries full = apply_correction(s, p);

    ProfileSeries subset;
    subset.r_grid = s.r_grid;
    for (int step = 10; step < 30; ++step) {
        subset.temps.push_back(s.temps[step]);
        subset.times_s.push_back(s.times_s[step]);
    }
    const ProfileSeries sub_corrected = apply_correction(subset, p);
    for (int step = 0; step < subset.steps(); ++step) {
        for (int j = 0; j < s.n_grid(); ++j) {
            REQUIRE(sub_corrected.temps[step][j] ==
                    doctest::Approx(full.temps[step + 10][j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_correction: warped steps clamp at the series start for d > 0") {
    const ProfileSeries s = test_series();
    CorrectionParams p;
    p.d = 2.5;
    const ProfileSeries out = apply_correction(s, p);
    // the first ceil(d) = 3 steps warp to negative indices and reuse step 0
    for (int step = 0; step < 3; ++step) {
        for (int j = 0; j < s.n_grid(); ++j) {
            REQUIRE(out.temps[step][j] >= s.temps[0][j] - 1e-12);
            if (step <= 2 && p.c * (step - p.d) <= 0.0) {
                REQUIRE(out.temps[step][j] == doctest::Approx(s.temps[0][j]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("fit_theta: verbatim boundary recovers the identity") {
    const ProfileSeries s = test_series();
    const FitResult fit = fit_theta(s, boundary_from(s));
    CHECK(std::abs(fit.params.a0 - 1.0) < 1e-3);
    CHECK(std::abs(fit.params.aR - 1.0) < 1e-3);
    CHECK(std::abs(fit.params.c - 1.0) < 1e-3);
    CHECK(std::abs(fit.params.b0) < 0.1);
    CHECK(std::abs(fit.params.bR) < 0.1);
    CHECK(std::abs(fit.params.d) < 0.1);
    CHECK(fit.objective_c2 <= fit.identity_objective_c2 + 1e-15);
}

TEST_CASE("fit_theta: recovers a known theta from forward-generated boundaries") {
    const ProfileSeries s = test_series();
    CorrectionParams truth;
    truth.a0 = 1.05;
    truth.b0 = 2.0;
    truth.aR = 0.97;
    truth.bR = -1.0;
    truth.c = 1.1;
    truth.d = 1.5;
    const ProfileSeries warped = apply_correction(s, truth);
    const BoundaryRecord boundary = boundary_from(warped);

    const FitResult fit = fit_theta(s, boundary);
    CHECK(std::abs(fit.params.a0 - truth.a0) / truth.a0 < 0.01);
    CHECK(std::abs(fit.params.aR - truth.aR) / truth.aR < 0.01);
    CHECK(std::abs(fit.params.c - truth.c) / truth.c < 0.01);
    CHECK(std::abs(fit.params.b0 - truth.b0) < 0.2);
    CHECK(std::abs(fit.params.bR - truth.bR) < 0.2);
    CHECK(std::abs(fit.params.d - truth.d) < 0.2);
}

TEST_CASE("fit_theta: 0.5 C boundary noise keeps the residual near the noise floor") {
    const ProfileSeries s = test_series();
    CorrectionParams truth;
    truth.a0 = 1.05;
    truth.b0 = 2.0;
    truth.aR = 0.97;
    truth.bR = -1.0;
    truth.c = 1.1;
    truth.d = 1.5;
    BoundaryRecord boundary = boundary_from(apply_correction(s, truth));
    Rng rng(21);
    for (auto& v : boundary.t_center_c) v += rng.normal(0.0, 0.5);
    for (auto& v : boundary.t_wall_c) v += rng.normal(0.0, 0.5);

    const FitResult fit = fit_theta(s, boundary);
    CHECK(std::sqrt(fit.objective_c2) <= 1.0);
}

TEST_CASE("fit_theta: objective never exceeds the identity objective") {
    const ProfileSeries s = test_series();
    Rng rng(31);
    for (int trial = 0; trial < 4; ++trial) {
        BoundaryRecord boundary = boundary_from(s);
        for (auto& v : boundary.t_center_c) v = v * rng.uniform(0.9, 1.1) + rng.normal(0.0, 3.0);
        for (auto& v : boundary.t_wall_c) v = v * rng.uniform(0.9, 1.1) + rng.normal(0.0, 3.0);
        const FitResult fit = fit_theta(s, boundary);
        REQUIRE(fit.objective_c2 <= fit.identity_objective_c2 + 1e-15);
    }
}

TEST_CASE("fit_theta: invalid boundary steps rejected") {
    const ProfileSeries s = test_series();
    BoundaryRecord rec = boundary_from(s);
    rec.steps.back() = s.steps() + 5;
    CHECK_THROWS_AS(fit_theta(s, rec), std::invalid_argument);
}

TEST_CASE("build_labels") {
    const ProfileSeries s = test_series();

    SUBCASE("identity params at grid resolution reproduce the rows") {
        const auto labels = build_labels(s, CorrectionParams::identity(), s.n_grid());
        for (int step = 0; step < s.steps(); ++step) {
            for (int j = 0; j < s.n_grid(); ++j) {
                REQUIRE(labels[step][j] == doctest::Approx(s.temps[step][j]).epsilon(1e-9));
            }
        }
    }

    SUBCASE("n_pts = 2 equals the corrected boundary trajectories") {
        CorrectionParams p;
        p.a0 = 1.02;
        p.bR = 1.5;
        const ProfileSeries corrected = apply_correction(s, p);
        const auto labels = build_labels(s, p, 2);
        for (int step = 0; step < s.steps(); ++step) {
            REQUIRE(labels[step][0] == doctest::Approx(corrected.temps[step][0]).epsilon(1e-12));
            REQUIRE(labels[step][1] ==
                    doctest::Approx(corrected.temps[step][s.n_grid() - 1]).epsilon(1e-12));
        }
    }

    SUBCASE("fitted labels track the boundary record within the fit residual") {
        CorrectionParams truth;
        truth.a0 = 1.03;
        truth.b0 = 1.0;
        truth.aR = 0.98;
        truth.bR = -0.5;
        const BoundaryRecord boundary = boundary_from(apply_correction(s, truth));
        const FitResult fit = fit_theta(s, boundary);
        const auto labels = build_labels(s, fit.params, 2);

        double acc = 0.0;
        for (int step = 0; step < s.steps(); ++step) {
            const double ec = labels[step][0] - boundary.t_center_c[step];
            const double ew = labels[step][1] - boundary.t_wall_c[step];
            acc += ec * ec + ew * ew;
        }
        const double rms = std::sqrt(acc / (2.0 * s.steps()));
        CHECK(rms <= std::sqrt(fit.objective_c2) + 1e-6);
    }
}
