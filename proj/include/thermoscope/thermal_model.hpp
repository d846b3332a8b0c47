#pragma once

#include <vector>

namespace thermoscope {

struct LatentHeat {
    double melt_temp_c;      // °C
    double latent_j_per_kg;  // J/kg
    double smoothing_c;      // Gaussian width of the apparent-heat-capacity bump, °C
};

struct WallPoint {
    double time_s;
    double temp_c;
};

struct ThermalConfig {
    double inner_radius_m = 0.072;
    int n_grid = 101;
    double diffusivity_m2_s = 1.0e-7;
    // representative melt-cast values: TNT melt near 80 °C, PETN near 140 °C
    std::vector<LatentHeat> latent_heats = {{80.0, 98.0e3, 3.0}, {140.0, 36.0e3, 3.0}};
    double density_kg_m3 = 1650.0;
    double heat_capacity_j_kg_c = 1100.0;
    // heater stand-in at the transducer height: ramp 20 -> 180 °C over 4 h, then hold
    std::vector<WallPoint> wall_schedule = {{0.0, 20.0}, {14400.0, 180.0}};
    double t_initial_c = 20.0;
    double step_interval_s = 120.0;
    double max_substep_s = 5.0;
    // run ends when the center reaches this ("until it detonates or deflagrates")
    double center_stop_temp_c = 160.0;
    int max_steps = 4000;  // hard cap in case the stop temperature is unreachable

    double wall_temp_at(double time_s) const;
    void validate() const;
};

// Radial temperature history T(r, s): one row per sampled experiment step.
struct ProfileSeries {
    std::vector<double> r_grid;                // ascending, r_grid[0]=0, back()=R
    std::vector<std::vector<double>> temps;    // steps x n_grid, °C
    std::vector<double> times_s;               // strictly increasing, one per step

    int steps() const { return static_cast<int>(temps.size()); }
    int n_grid() const { return static_cast<int>(r_grid.size()); }

    // linear interpolation of row `step` at radius r (clamped to [0, R])
    double temp_at(int step, double r) const;
};

// Implicit radial conduction solve with latent heat folded into an apparent
// heat capacity; profiles sampled every step_interval until the center-stop
// temperature (or max_steps) is reached.
ProfileSeries solve_heating(const ThermalConfig& config);

// Row `step` resampled at n_pts uniform radii including both endpoints.
std::vector<double> interpolate_profile(const ProfileSeries& series, int step, int n_pts);

}  // namespace thermoscope
