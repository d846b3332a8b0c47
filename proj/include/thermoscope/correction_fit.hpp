#pragma once

#include <vector>

#include "thermoscope/thermal_model.hpp"

namespace thermoscope {

// Thermocouple trajectories at r = 0 and r = R, one entry per experiment step.
struct BoundaryRecord {
    std::vector<int> steps;
    std::vector<double> t_center_c;
    std::vector<double> t_wall_c;

    void validate() const;
};

// theta = {a0, b0, aR, bR, c, d}: temperature scale/shift at the two
// boundaries (linearly interpolated in r) and a time scale/shift in steps.
struct CorrectionParams {
    double a0 = 1.0;
    double b0 = 0.0;
    double aR = 1.0;
    double bR = 0.0;
    double c = 1.0;
    double d = 0.0;

    static CorrectionParams identity() { return {}; }
    void validate() const;
};

struct FitOptions {
    int max_evals = 10000;
    double tol = 1.0e-10;
    // fit-failure ceiling on the identity-theta RMS residual, °C
    double identity_residual_ceiling_c = 50.0;
    int restarts = 2;
};

struct FitResult {
    CorrectionParams params;
    double objective_c2 = 0.0;           // mean squared boundary residual, °C^2
    double identity_objective_c2 = 0.0;  // same objective at the identity theta
    int evaluations = 0;
};

// T(r, s) = a(r) * (T'(r, c (s - d)) - b(r)); the warped step index is
// linearly interpolated and clamped to the series range.
ProfileSeries apply_correction(const ProfileSeries& series, const CorrectionParams& params);

// Least-squares fit of theta against the boundary record (Nelder-Mead on a
// log-reparameterized simplex, started at the identity).
FitResult fit_theta(const ProfileSeries& series, const BoundaryRecord& boundary,
                    const FitOptions& options = {});

// apply_correction then interpolate each step at n_pts radii: the CNN targets.
std::vector<std::vector<double>> build_labels(const ProfileSeries& series,
                                              const CorrectionParams& params, int n_pts);

}  // namespace thermoscope
