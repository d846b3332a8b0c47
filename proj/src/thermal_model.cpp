#include "thermoscope/thermal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "thermoscope/errors.hpp"

namespace thermoscope {

double ThermalConfig::wall_temp_at(double time_s) const {
    const auto& ws = wall_schedule;
    if (ws.empty()) throw std::invalid_argument("ThermalConfig: empty wall_schedule");
    if (time_s <= ws.front().time_s) return ws.front().temp_c;
    for (std::size_t i = 1; i < ws.size(); ++i) {
        if (time_s <= ws[i].time_s) {
            const double f = (time_s - ws[i - 1].time_s) / (ws[i].time_s - ws[i - 1].time_s);
            return ws[i - 1].temp_c + f * (ws[i].temp_c - ws[i - 1].temp_c);
        }
    }
    return ws.back().temp_c;  // hold after the last breakpoint
}

void ThermalConfig::validate() const {
    if (inner_radius_m <= 0) throw std::invalid_argument("ThermalConfig: inner_radius must be > 0");
    if (n_grid < 11) throw std::invalid_argument("ThermalConfig: n_grid must be >= 11");
    if (diffusivity_m2_s <= 0) throw std::invalid_argument("ThermalConfig: diffusivity must be > 0");
    if (density_kg_m3 <= 0 || heat_capacity_j_kg_c <= 0) {
        throw std::invalid_argument("ThermalConfig: density and heat capacity must be > 0");
    }
    for (const auto& lh : latent_heats) {
        if (lh.smoothing_c <= 0) throw std::invalid_argument("ThermalConfig: smoothing width must be > 0");
    }
    if (step_interval_s <= 0) throw std::invalid_argument("ThermalConfig: step_interval must be > 0");
    if (max_substep_s <= 0) throw std::invalid_argument("ThermalConfig: max_substep must be > 0");
    if (wall_schedule.empty()) throw std::invalid_argument("ThermalConfig: empty wall_schedule");
    for (std::size_t i = 1; i < wall_schedule.size(); ++i) {
        if (wall_schedule[i].time_s <= wall_schedule[i - 1].time_s) {
            throw std::invalid_argument("ThermalConfig: wall_schedule times must increase");
        }
    }
}

double ProfileSeries::temp_at(int step, double r) const {
    if (step < 0 || step >= steps()) throw std::invalid_argument("ProfileSeries: step out of range");
    const auto& row = temps[step];
    if (r <= r_grid.front()) return row.front();
    if (r >= r_grid.back()) return row.back();
    const auto it = std::upper_bound(r_grid.begin(), r_grid.end(), r);
    const std::size_t j = static_cast<std::size_t>(it - r_grid.begin());
    const double f = (r - r_grid[j - 1]) / (r_grid[j] - r_grid[j - 1]);
    return row[j - 1] + f * (row[j] - row[j - 1]);
}

namespace {

// apparent heat capacity: base c_p plus one normalized Gaussian bump of area
// L_i at each melt temperature
double effective_heat_capacity(double temp_c, const ThermalConfig& cfg) {
    double cp = cfg.heat_capacity_j_kg_c;
    for (const auto& lh : cfg.latent_heats) {
        const double z = (temp_c - lh.melt_temp_c) / lh.smoothing_c;
        cp += lh.latent_j_per_kg / (lh.smoothing_c * std::sqrt(2.0 * std::numbers::pi)) *
              std::exp(-0.5 * z * z);
    }
    return cp;
}

// Thomas algorithm; diag/upper/lower are overwritten.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

// One implicit substep with c_p,eff lagged on the current iterate; returns
// the new temperature field.
std::vector<double> implicit_substep(const std::vector<double>& temp, double dt, double wall_temp,
                                     const ThermalConfig& cfg, int step_index) {
    const int n = cfg.n_grid;
    const double h = cfg.inner_radius_m / static_cast<double>(n - 1);
    const double k = cfg.diffusivity_m2_s * cfg.density_kg_m3 * cfg.heat_capacity_j_kg_c;

    std::vector<double> current = temp;  // nonlinear iterate
    current[n - 1] = wall_temp;

    constexpr int kMaxIters = 120;
    constexpr double kTol = 1.0e-8;
    std::vector<double> lower(n), diag(n), upper(n), rhs(n);
    for (int iter = 0; iter < kMaxIters; ++iter) {
        // progressively damp so the lagged c_p cannot limit-cycle across a bump
        const double relax = iter < 4 ? 1.0 : iter < 20 ? 0.5 : iter < 48 ? 0.25 : 0.125;
        for (int j = 0; j < n - 1; ++j) {
            const double rc = cfg.density_kg_m3 * effective_heat_capacity(current[j], cfg);
            const double beta = k * dt / (rc * h * h);
            if (j == 0) {
                // symmetry at the axis: (1/r)(r T')' -> 4 (T1 - T0)/h^2
                lower[0] = 0.0;
                diag[0] = 1.0 + 4.0 * beta;
                upper[0] = -4.0 * beta;
                rhs[0] = temp[0];
            } else {
                const double r = static_cast<double>(j) * h;
                const double w_minus = (r - 0.5 * h) / r;
                const double w_plus = (r + 0.5 * h) / r;
                lower[j] = -beta * w_minus;
                diag[j] = 1.0 + beta * (w_minus + w_plus);
                upper[j] = -beta * w_plus;
                rhs[j] = temp[j];
            }
        }
        lower[n - 1] = 0.0;
        diag[n - 1] = 1.0;
        upper[n - 1] = 0.0;
        rhs[n - 1] = wall_temp;

        solve_tridiagonal(lower, diag, upper, rhs);

        double delta = 0.0;
        for (int j = 0; j < n; ++j) {
            delta = std::max(delta, std::abs(rhs[j] - current[j]));
            current[j] += relax * (rhs[j] - current[j]);
        }
        if (delta < kTol) return current;
    }
    throw SolverFailure(step_index, "nonlinear iteration did not converge");
}

// One dt advance with recursive halving when a stiff latent-heat crossing
// stalls the lagged iteration; the effective substep only ever shrinks.
std::vector<double> advance(const std::vector<double>& temp, double t_start, double dt,
                            const ThermalConfig& cfg, int step_index, int depth = 0) {
    try {
        return implicit_substep(temp, dt, cfg.wall_temp_at(t_start + dt), cfg, step_index);
    } catch (const SolverFailure&) {
        if (depth >= 12) throw;
        const std::vector<double> mid = advance(temp, t_start, dt / 2.0, cfg, step_index, depth + 1);
        return advance(mid, t_start + dt / 2.0, dt / 2.0, cfg, step_index, depth + 1);
    }
}

}  // namespace

ProfileSeries solve_heating(const ThermalConfig& config) {
    config.validate();

    const int n = config.n_grid;
    ProfileSeries series;
    series.r_grid.resize(n);
    for (int j = 0; j < n; ++j) {
        series.r_grid[j] = config.inner_radius_m * static_cast<double>(j) / static_cast<double>(n - 1);
    }

    std::vector<double> temp(n, config.t_initial_c);
    temp[n - 1] = config.wall_temp_at(0.0);
    series.temps.push_back(temp);
    series.times_s.push_back(0.0);

    const int substeps = std::max(1, static_cast<int>(std::ceil(config.step_interval_s / config.max_substep_s)));
    const double dt = config.step_interval_s / static_cast<double>(substeps);

    for (int s = 1; s < config.max_steps; ++s) {
        const double t_start = static_cast<double>(s - 1) * config.step_interval_s;
        for (int u = 0; u < substeps; ++u) {
            temp = advance(temp, t_start + static_cast<double>(u) * dt, dt, config, s);
        }
        for (double v : temp) {
            if (!std::isfinite(v)) throw SolverFailure(s, "non-finite temperature");
        }
        series.temps.push_back(temp);
        series.times_s.push_back(static_cast<double>(s) * config.step_interval_s);
        if (temp[0] >= config.center_stop_temp_c) break;
    }
    return series;
}

std::vector<double> interpolate_profile(const ProfileSeries& series, int step, int n_pts) {
    if (step < 0 || step >= series.steps()) {
        throw std::invalid_argument("interpolate_profile: step out of range");
    }
    if (n_pts < 2) throw std::invalid_argument("interpolate_profile: n_pts must be >= 2");

    const double radius = series.r_grid.back();
    std::vector<double> out(n_pts);
    for (int i = 0; i < n_pts; ++i) {
        const double r = radius * static_cast<double>(i) / static_cast<double>(n_pts - 1);
        out[i] = series.temp_at(step, r);
    }
    return out;
}

}  // namespace thermoscope
