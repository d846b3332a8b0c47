#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "thermoscope/dataset.hpp"

namespace thermoscope {

struct DatasetManifest {
    int format_version = 1;
    std::string provenance = "synthetic";
    RingGeometry geometry;
    ExcitationSpec excitation;
    double sample_rate = 5.0e6;
    int n_t = 2048;
    double step_interval_s = 120.0;
    std::vector<int> run_ids;
    std::vector<int> steps_per_run;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> run_seeds;
};

// Directory layout:
//   manifest.json
//   waveforms/run_<RR>/step_<SSSS>_tx_<TT>.f32le   (N_t x (n_transducers-1),
//       row-major float32 LE, receivers in ascending absolute index, tx excluded)
//   thermocouples_<RR>.csv                          (step,time_s,t_center_c,t_wall_c)
//   sim_profiles_<RR>.csv                           (header: r values in m; rows: °C per step)
//   corrections.json                                (theta per run, written by fit-correction)
void write_dataset(const RunConfig& config, const std::vector<RunData>& runs,
                   const std::filesystem::path& dir);

// On-disk dataset handle; loads manifest + CSVs eagerly, waveform blobs lazily.
class DiskDataset {
public:
    explicit DiskDataset(const std::filesystem::path& dir);

    const DatasetManifest& manifest() const { return manifest_; }
    const std::filesystem::path& root() const { return root_; }

    const ProfileSeries& sim_profiles(int run) const { return profiles_.at(run); }
    const BoundaryRecord& thermocouples(int run) const { return boundaries_.at(run); }

    bool has_corrections() const { return !thetas_.empty(); }
    const CorrectionParams& theta(int run) const;

    // stores theta values to corrections.json next to the manifest
    void write_corrections(const std::vector<CorrectionParams>& thetas);

    std::vector<double> read_blob(int run, int step, int tx) const;  // row-major N_t x (n-1)

    static std::filesystem::path blob_path(const std::filesystem::path& root, int run, int step,
                                           int tx);

private:
    std::filesystem::path root_;
    DatasetManifest manifest_;
    std::vector<ProfileSeries> profiles_;
    std::vector<BoundaryRecord> boundaries_;
    std::vector<CorrectionParams> thetas_;
};

// DatasetSource over a DiskDataset (requires corrections for label access).
class DiskSource : public DatasetSource {
public:
    explicit DiskSource(DiskDataset dataset);

    int n_runs() const override;
    int n_steps(int run) const override;
    int n_transducers() const override;
    const ProfileSeries& corrected_profiles(int run) const override;
    MeasurementArray raw_measurement(int run, int step, int tx,
                                     const std::vector<int>& rx_indices) const override;
    Waveform excitation() const override;

    const DiskDataset& dataset() const { return dataset_; }

private:
    DiskDataset dataset_;
    std::vector<ProfileSeries> corrected_;
};

}  // namespace thermoscope
