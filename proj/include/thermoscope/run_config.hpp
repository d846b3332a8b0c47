#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "thermoscope/acoustic_synth.hpp"
#include "thermoscope/cnn.hpp"
#include "thermoscope/correction_fit.hpp"
#include "thermoscope/signal_pipeline.hpp"
#include "thermoscope/thermal_model.hpp"

namespace thermoscope {

// Synthetic-corpus shape: 5 heating runs x 16 transmitters = 80 sets, with
// per-run physics jitter so transmitter sets are not interchangeable.
struct DatasetConfig {
    int n_runs = 5;
    double thermocouple_noise_c = 0.5;
    double thermocouple_scale_jitter = 0.02;  // per-run gain error on the probes
    double thermocouple_bias_jitter_c = 1.0;  // per-run offset error on the probes
    double ramp_jitter = 0.10;
    double material_jitter = 0.05;
    bool transfer_variation = true;
};

struct SweepGrid {
    std::vector<int> n_pts = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    std::vector<int> n_rx = {1, 3, 5, 7, 9};
};

struct RunConfig {
    ThermalConfig thermal;
    RingGeometry geometry;
    AcousticConfig acoustic;
    CnnConfig cnn;
    TrainConfig training;
    FitOptions fit;
    DatasetConfig dataset;
    SweepGrid sweep;
    int decimation = 4;
    int n_folds = 10;
    bool stratify_by_run = false;
    std::uint64_t seed = 17;

    // keeps cnn input dims consistent with the acquisition settings
    void sync_derived() {
        cnn.input_time = acoustic.n_t / decimation;
    }
    void validate() const;
};

// Defaults overlaid with the (partial) JSON file at `path`.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

}  // namespace thermoscope
