#include "thermoscope/run_config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace thermoscope {

void RunConfig::validate() const {
    thermal.validate();
    geometry.validate();
    acoustic.validate();
    cnn.validate();
    if (decimation < 1 || acoustic.n_t % decimation != 0) {
        throw std::invalid_argument("RunConfig: decimation must divide n_t");
    }
    if (n_folds < 2) throw std::invalid_argument("RunConfig: n_folds must be >= 2");
    if (dataset.n_runs < 1) throw std::invalid_argument("RunConfig: n_runs must be >= 1");
    for (int n : sweep.n_rx) {
        if (n % 2 == 0 || n < 1) throw std::invalid_argument("RunConfig: sweep n_rx must be odd");
    }
    for (int n : sweep.n_pts) {
        if (n < 2) throw std::invalid_argument("RunConfig: sweep n_pts must be >= 2");
    }
}

namespace {

using nlohmann::json;

template <typename T>
void opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_thermal(const json& j, ThermalConfig& c) {
    opt(j, "inner_radius_m", c.inner_radius_m);
    opt(j, "n_grid", c.n_grid);
    opt(j, "diffusivity_m2_s", c.diffusivity_m2_s);
    opt(j, "density_kg_m3", c.density_kg_m3);
    opt(j, "heat_capacity_j_kg_c", c.heat_capacity_j_kg_c);
    opt(j, "t_initial_c", c.t_initial_c);
    opt(j, "step_interval_s", c.step_interval_s);
    opt(j, "max_substep_s", c.max_substep_s);
    opt(j, "center_stop_temp_c", c.center_stop_temp_c);
    opt(j, "max_steps", c.max_steps);
    if (j.contains("latent_heats")) {
        c.latent_heats.clear();
        for (const auto& lh : j.at("latent_heats")) {
            c.latent_heats.push_back({lh.at("melt_temp_c").get<double>(),
                                      lh.at("latent_j_per_kg").get<double>(),
                                      lh.at("smoothing_c").get<double>()});
        }
    }
    if (j.contains("wall_schedule")) {
        c.wall_schedule.clear();
        for (const auto& wp : j.at("wall_schedule")) {
            c.wall_schedule.push_back({wp.at("time_s").get<double>(), wp.at("temp_c").get<double>()});
        }
    }
}

void parse_geometry(const json& j, RingGeometry& g) {
    opt(j, "n_transducers", g.n_transducers);
    opt(j, "inner_radius_m", g.inner_radius_m);
    opt(j, "wall_thickness_m", g.wall_thickness_m);
    opt(j, "height_m", g.height_m);
}

void parse_excitation(const json& j, ExcitationSpec& e) {
    opt(j, "center_frequency_hz", e.center_frequency);
    opt(j, "std_frequency_hz", e.std_frequency);
    opt(j, "amplitude_vpp", e.amplitude_vpp);
    opt(j, "duration_s", e.duration);
}

void parse_acoustic(const json& j, AcousticConfig& a) {
    opt(j, "sound_speed_ref_m_s", a.sound_speed_ref_m_s);
    opt(j, "temp_coefficient", a.temp_coefficient);
    opt(j, "ref_temp_c", a.ref_temp_c);
    opt(j, "guided_speed_m_s", a.guided_speed_m_s);
    opt(j, "bulk_attenuation_np_m", a.bulk_attenuation_np_m);
    opt(j, "guided_amplitude_ratio", a.guided_amplitude_ratio);
    opt(j, "noise_snr_db", a.noise_snr_db);
    opt(j, "sample_rate_hz", a.sample_rate);
    opt(j, "n_t", a.n_t);
    if (j.contains("excitation")) parse_excitation(j.at("excitation"), a.excitation);
}

void parse_cnn(const json& j, CnnConfig& c) {
    opt(j, "n_blocks", c.n_blocks);
    opt(j, "base_filters", c.base_filters);
    opt(j, "kernel_time", c.kernel_time);
    opt(j, "kernel_rx", c.kernel_rx);
    opt(j, "pool_time", c.pool_time);
    opt(j, "dropout_rate", c.dropout_rate);
    opt(j, "n_pts", c.n_pts);
    opt(j, "input_rx", c.input_rx);
}

void parse_training(const json& j, TrainConfig& t) {
    opt(j, "learning_rate", t.adam.learning_rate);
    opt(j, "beta1", t.adam.beta1);
    opt(j, "beta2", t.adam.beta2);
    opt(j, "epsilon", t.adam.epsilon);
    opt(j, "batch_size", t.batch_size);
    opt(j, "max_epochs", t.max_epochs);
    opt(j, "patience", t.patience);
    opt(j, "validation_fraction", t.validation_fraction);
}

void parse_fit(const json& j, FitOptions& f) {
    opt(j, "max_evals", f.max_evals);
    opt(j, "tol", f.tol);
    opt(j, "identity_residual_ceiling_c", f.identity_residual_ceiling_c);
    opt(j, "restarts", f.restarts);
}

void parse_dataset(const json& j, DatasetConfig& d) {
    opt(j, "n_runs", d.n_runs);
    opt(j, "thermocouple_noise_c", d.thermocouple_noise_c);
    opt(j, "thermocouple_scale_jitter", d.thermocouple_scale_jitter);
    opt(j, "thermocouple_bias_jitter_c", d.thermocouple_bias_jitter_c);
    opt(j, "ramp_jitter", d.ramp_jitter);
    opt(j, "material_jitter", d.material_jitter);
    opt(j, "transfer_variation", d.transfer_variation);
}

void parse_sweep(const json& j, SweepGrid& s) {
    opt(j, "n_pts", s.n_pts);
    opt(j, "n_rx", s.n_rx);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }

    RunConfig cfg;
    if (j.contains("thermal")) parse_thermal(j.at("thermal"), cfg.thermal);
    if (j.contains("geometry")) parse_geometry(j.at("geometry"), cfg.geometry);
    if (j.contains("acoustic")) parse_acoustic(j.at("acoustic"), cfg.acoustic);
    if (j.contains("cnn")) parse_cnn(j.at("cnn"), cfg.cnn);
    if (j.contains("training")) parse_training(j.at("training"), cfg.training);
    if (j.contains("fit")) parse_fit(j.at("fit"), cfg.fit);
    if (j.contains("dataset")) parse_dataset(j.at("dataset"), cfg.dataset);
    if (j.contains("sweep")) parse_sweep(j.at("sweep"), cfg.sweep);
    opt(j, "decimation", cfg.decimation);
    opt(j, "n_folds", cfg.n_folds);
    opt(j, "stratify_by_run", cfg.stratify_by_run);
    opt(j, "seed", cfg.seed);

    cfg.sync_derived();
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

}  // namespace thermoscope
