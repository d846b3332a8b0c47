#include "thermoscope/correction_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thermoscope/errors.hpp"
#include "thermoscope/nelder_mead.hpp"

namespace thermoscope {

void BoundaryRecord::validate() const {
    if (steps.size() != t_center_c.size() || steps.size() != t_wall_c.size()) {
        throw std::invalid_argument("BoundaryRecord: field lengths differ");
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!std::isfinite(t_center_c[i]) || !std::isfinite(t_wall_c[i])) {
            throw std::invalid_argument("BoundaryRecord: non-finite temperature");
        }
    }
}

void CorrectionParams::validate() const {
    if (a0 <= 0 || aR <= 0) throw std::invalid_argument("CorrectionParams: scales must be > 0");
    if (c <= 0) throw std::invalid_argument("CorrectionParams: time scale must be > 0");
}

namespace {

// row of the series at (possibly fractional) warped step index, clamped
double warped_temp(const ProfileSeries& series, double step_index, int node) {
    const double s_max = static_cast<double>(series.steps() - 1);
    const double w = std::clamp(step_index, 0.0, s_max);
    const int lo = static_cast<int>(std::floor(w));
    const int hi = std::min(lo + 1, series.steps() - 1);
    const double f = w - static_cast<double>(lo);
    return series.temps[lo][node] + f * (series.temps[hi][node] - series.temps[lo][node]);
}

double corrected_boundary(const ProfileSeries& series, const CorrectionParams& p, int step,
                          bool wall) {
    const int node = wall ? series.n_grid() - 1 : 0;
    const double a = wall ? p.aR : p.a0;
    const double b = wall ? p.bR : p.b0;
    const double w = p.c * (static_cast<double>(step) - p.d);
    return a * (warped_temp(series, w, node) - b);
}

double boundary_objective(const ProfileSeries& series, const BoundaryRecord& boundary,
                          const CorrectionParams& p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < boundary.steps.size(); ++i) {
        const int s = boundary.steps[i];
        const double ec = corrected_boundary(series, p, s, false) - boundary.t_center_c[i];
        const double ew = corrected_boundary(series, p, s, true) - boundary.t_wall_c[i];
        sum += ec * ec + ew * ew;
    }
    // reported as a mean; the argmin matches the summed form
    return sum / (2.0 * static_cast<double>(boundary.steps.size()));
}

CorrectionParams unpack(const std::vector<double>& u) {
    CorrectionParams p;
    p.a0 = std::exp(u[0]);
    p.b0 = u[1];
    p.aR = std::exp(u[2]);
    p.bR = u[3];
    p.c = std::exp(u[4]);
    p.d = u[5];
    return p;
}

}  // namespace

ProfileSeries apply_correction(const ProfileSeries& series, const CorrectionParams& params) {
    params.validate();
    if (series.steps() == 0) throw std::invalid_argument("apply_correction: empty series");

    const double radius = series.r_grid.back();
    ProfileSeries out;
    out.r_grid = series.r_grid;
    out.times_s = series.times_s;
    out.temps.resize(series.steps(), std::vector<double>(series.n_grid()));

    for (int s = 0; s < series.steps(); ++s) {
        const double w = params.c * (static_cast<double>(s) - params.d);
        for (int j = 0; j < series.n_grid(); ++j) {
            const double x = series.r_grid[j] / radius;
            const double a = params.a0 + (params.aR - params.a0) * x;
            const double b = params.b0 + (params.bR - params.b0) * x;
            out.temps[s][j] = a * (warped_temp(series, w, j) - b);
        }
    }
    return out;
}

FitResult fit_theta(const ProfileSeries& series, const BoundaryRecord& boundary,
                    const FitOptions& options) {
    boundary.validate();
    if (boundary.steps.empty()) throw std::invalid_argument("fit_theta: empty boundary record");
    for (int s : boundary.steps) {
        if (s < 0 || s >= series.steps()) {
            throw std::invalid_argument("fit_theta: boundary step outside series range");
        }
    }

    auto objective = [&](const std::vector<double>& u) {
        return boundary_objective(series, boundary, unpack(u));
    };

    const double identity_obj = boundary_objective(series, boundary, CorrectionParams::identity());

    std::vector<double> best_u(6, 0.0);
    double best_f = identity_obj;
    int evals = 0;
    std::vector<double> step = {0.05, 1.0, 0.05, 1.0, 0.05, 0.5};
    for (int attempt = 0; attempt <= options.restarts; ++attempt) {
        const auto r = nelder_mead(objective, best_u, step,
                                   options.max_evals / (options.restarts + 1), options.tol);
        evals += r.evaluations;
        if (r.fx < best_f) {
            best_f = r.fx;
            best_u = r.x;
        }
        for (double& st : step) st *= 0.25;  // restart with a tighter simplex around the best point
    }

    if (best_f >= identity_obj && std::sqrt(identity_obj) > options.identity_residual_ceiling_c) {
        throw FitFailure(std::sqrt(identity_obj), std::sqrt(best_f));
    }

    FitResult result;
    result.params = unpack(best_u);
    result.objective_c2 = best_f;
    result.identity_objective_c2 = identity_obj;
    result.evaluations = evals;
    return result;
}

std::vector<std::vector<double>> build_labels(const ProfileSeries& series,
                                              const CorrectionParams& params, int n_pts) {
    const ProfileSeries corrected = apply_correction(series, params);
    std::vector<std::vector<double>> labels(corrected.steps());
    for (int s = 0; s < corrected.steps(); ++s) {
        labels[s] = interpolate_profile(corrected, s, n_pts);
    }
    return labels;
}

}  // namespace thermoscope
