#include "thermoscope/dataset.hpp"

#include <stdexcept>

#include "thermoscope/rng.hpp"
#include "thermoscope/thread_pool.hpp"

namespace thermoscope {

std::uint64_t run_seed_for(std::uint64_t master_seed, int run_id) {
    return derive_seed(master_seed, 0x5eedu, static_cast<std::uint64_t>(run_id));
}

std::uint64_t measurement_seed(std::uint64_t run_seed, int step, int tx) {
    return derive_seed(run_seed, 0xacu, static_cast<std::uint64_t>(step),
                       static_cast<std::uint64_t>(tx));
}

namespace {

ThermalConfig jitter_thermal(const ThermalConfig& base, const DatasetConfig& ds, Rng& rng) {
    ThermalConfig t = base;
    const double ramp = 1.0 + rng.uniform(-ds.ramp_jitter, ds.ramp_jitter);
    for (auto& wp : t.wall_schedule) wp.time_s *= ramp;
    t.diffusivity_m2_s *= 1.0 + rng.uniform(-ds.material_jitter, ds.material_jitter);
    t.density_kg_m3 *= 1.0 + rng.uniform(-ds.material_jitter, ds.material_jitter);
    t.heat_capacity_j_kg_c *= 1.0 + rng.uniform(-ds.material_jitter, ds.material_jitter);
    return t;
}

// The probes see the true boundary temperatures through a small per-run
// systematic scale/offset plus white noise; the theta fit has to undo this.
BoundaryRecord draw_thermocouples(const ProfileSeries& series, const DatasetConfig& ds, Rng& rng) {
    const double a_c = 1.0 + rng.uniform(-ds.thermocouple_scale_jitter, ds.thermocouple_scale_jitter);
    const double a_w = 1.0 + rng.uniform(-ds.thermocouple_scale_jitter, ds.thermocouple_scale_jitter);
    const double b_c = rng.uniform(-ds.thermocouple_bias_jitter_c, ds.thermocouple_bias_jitter_c);
    const double b_w = rng.uniform(-ds.thermocouple_bias_jitter_c, ds.thermocouple_bias_jitter_c);

    BoundaryRecord rec;
    const int last = series.n_grid() - 1;
    for (int s = 0; s < series.steps(); ++s) {
        rec.steps.push_back(s);
        rec.t_center_c.push_back(a_c * (series.temps[s][0] - b_c) +
                                 rng.normal(0.0, ds.thermocouple_noise_c));
        rec.t_wall_c.push_back(a_w * (series.temps[s][last] - b_w) +
                               rng.normal(0.0, ds.thermocouple_noise_c));
    }
    return rec;
}

}  // namespace

std::vector<RunData> generate_runs(const RunConfig& config) {
    config.validate();
    std::vector<RunData> runs(config.dataset.n_runs);

    parallel_for(config.dataset.n_runs, [&](int r) {
        RunData& run = runs[r];
        run.run_id = r;
        run.run_seed = run_seed_for(config.seed, r);

        Rng rng(derive_seed(run.run_seed, 0x1417u));
        run.thermal = jitter_thermal(config.thermal, config.dataset, rng);
        run.sim_profiles = solve_heating(run.thermal);
        run.thermocouples = draw_thermocouples(run.sim_profiles, config.dataset, rng);
        run.variation = config.dataset.transfer_variation
                            ? draw_transducer_variation(run.run_seed, config.geometry.n_transducers)
                            : TransducerVariation::none(config.geometry.n_transducers);
    });
    return runs;
}

void fit_corrections(std::vector<RunData>& runs, const FitOptions& options) {
    parallel_for(static_cast<int>(runs.size()), [&](int r) {
        RunData& run = runs[r];
        const FitResult fit = fit_theta(run.sim_profiles, run.thermocouples, options);
        run.theta = fit.params;
        run.corrected = apply_correction(run.sim_profiles, fit.params);
    });
}

SyntheticSource::SyntheticSource(const RunConfig& config, std::vector<RunData> runs)
    : config_(config), runs_(std::move(runs)) {}

const ProfileSeries& SyntheticSource::corrected_profiles(int run) const {
    const RunData& r = runs_.at(run);
    if (!r.theta.has_value()) {
        throw std::logic_error("SyntheticSource: corrections not fitted for run " +
                               std::to_string(run));
    }
    return r.corrected;
}

MeasurementArray SyntheticSource::raw_measurement(int run, int step, int tx,
                                                  const std::vector<int>& rx_indices) const {
    const RunData& r = runs_.at(run);
    return synthesize_measurement(RadialProfile(r.sim_profiles, step), tx, rx_indices,
                                  config_.geometry, config_.acoustic,
                                  measurement_seed(r.run_seed, step, tx), r.variation);
}

Waveform SyntheticSource::excitation() const {
    return make_excitation(config_.acoustic.excitation, config_.acoustic.sample_rate);
}

SyntheticSource make_synthetic_source(const RunConfig& config) {
    std::vector<RunData> runs = generate_runs(config);
    fit_corrections(runs, config.fit);
    return SyntheticSource(config, std::move(runs));
}

}  // namespace thermoscope
