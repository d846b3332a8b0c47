#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "thermoscope/acoustic_synth.hpp"
#include "thermoscope/correction_fit.hpp"
#include "thermoscope/run_config.hpp"

namespace thermoscope {

// One heating experiment: jittered physics, simulated truth, thermocouple
// traces and (after fitting) the theta correction.
struct RunData {
    int run_id = 0;
    std::uint64_t run_seed = 0;
    ThermalConfig thermal;  // jittered copy used for this run
    ProfileSeries sim_profiles;
    BoundaryRecord thermocouples;
    TransducerVariation variation;
    std::optional<CorrectionParams> theta;
    ProfileSeries corrected;  // labels source; valid once theta is set
};

std::uint64_t run_seed_for(std::uint64_t master_seed, int run_id);
std::uint64_t measurement_seed(std::uint64_t run_seed, int step, int tx);

// Solves the jittered heating problem and draws the thermocouple traces and
// transducer variation for every run. Runs solve in parallel.
std::vector<RunData> generate_runs(const RunConfig& config);

// Eq. 3/4 correction per run: fills theta and the corrected label series.
void fit_corrections(std::vector<RunData>& runs, const FitOptions& options);

// Uniform view over synthetic (on-the-fly) and on-disk corpora; the sweep
// rebuilds per-cell inputs and labels through this interface.
class DatasetSource {
public:
    virtual ~DatasetSource() = default;
    virtual int n_runs() const = 0;
    virtual int n_steps(int run) const = 0;
    virtual int n_transducers() const = 0;
    virtual const ProfileSeries& corrected_profiles(int run) const = 0;
    virtual MeasurementArray raw_measurement(int run, int step, int tx,
                                             const std::vector<int>& rx_indices) const = 0;
    virtual Waveform excitation() const = 0;
};

// Generates waveforms on demand; bit-identical to what write_dataset stores
// (up to the f32 storage width) because both share the same seeds.
class SyntheticSource : public DatasetSource {
public:
    SyntheticSource(const RunConfig& config, std::vector<RunData> runs);

    int n_runs() const override { return static_cast<int>(runs_.size()); }
    int n_steps(int run) const override { return runs_.at(run).sim_profiles.steps(); }
    int n_transducers() const override { return config_.geometry.n_transducers; }
    const ProfileSeries& corrected_profiles(int run) const override;
    MeasurementArray raw_measurement(int run, int step, int tx,
                                     const std::vector<int>& rx_indices) const override;
    Waveform excitation() const override;

    const RunConfig& config() const { return config_; }
    const std::vector<RunData>& runs() const { return runs_; }

private:
    RunConfig config_;
    std::vector<RunData> runs_;
};

// generate_runs + fit_corrections in one step.
SyntheticSource make_synthetic_source(const RunConfig& config);

}  // namespace thermoscope
