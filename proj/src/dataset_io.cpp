#include "thermoscope/dataset_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermoscope/errors.hpp"
#include "thermoscope/report.hpp"
#include "thermoscope/thread_pool.hpp"

static_assert(std::endian::native == std::endian::little,
              "waveform blobs are little-endian; add byte swapping for this target");

namespace thermoscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string run_tag(int run) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", run);
    return buf;
}

json manifest_to_json(const DatasetManifest& m) {
    json j;
    j["format_version"] = m.format_version;
    j["provenance"] = m.provenance;
    j["geometry"] = {{"n_transducers", m.geometry.n_transducers},
                     {"inner_radius_m", m.geometry.inner_radius_m},
                     {"wall_thickness_m", m.geometry.wall_thickness_m},
                     {"height_m", m.geometry.height_m}};
    j["excitation"] = {{"center_frequency_hz", m.excitation.center_frequency},
                       {"std_frequency_hz", m.excitation.std_frequency},
                       {"amplitude_vpp", m.excitation.amplitude_vpp},
                       {"duration_s", m.excitation.duration}};
    j["sample_rate_hz"] = m.sample_rate;
    j["n_t"] = m.n_t;
    j["step_interval_s"] = m.step_interval_s;
    j["run_ids"] = m.run_ids;
    j["steps_per_run"] = m.steps_per_run;
    j["master_seed"] = m.master_seed;
    j["run_seeds"] = m.run_seeds;
    return j;
}

DatasetManifest manifest_from_json(const json& j, const fs::path& file) {
    DatasetManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != 1) {
            throw DatasetLoadError("dataset: unsupported format_version " +
                                   std::to_string(m.format_version) + " in " + file.string());
        }
        m.provenance = j.at("provenance").get<std::string>();
        const auto& g = j.at("geometry");
        m.geometry.n_transducers = g.at("n_transducers").get<int>();
        m.geometry.inner_radius_m = g.at("inner_radius_m").get<double>();
        m.geometry.wall_thickness_m = g.at("wall_thickness_m").get<double>();
        m.geometry.height_m = g.at("height_m").get<double>();
        const auto& e = j.at("excitation");
        m.excitation.center_frequency = e.at("center_frequency_hz").get<double>();
        m.excitation.std_frequency = e.at("std_frequency_hz").get<double>();
        m.excitation.amplitude_vpp = e.at("amplitude_vpp").get<double>();
        m.excitation.duration = e.at("duration_s").get<double>();
        m.sample_rate = j.at("sample_rate_hz").get<double>();
        m.n_t = j.at("n_t").get<int>();
        m.step_interval_s = j.at("step_interval_s").get<double>();
        m.run_ids = j.at("run_ids").get<std::vector<int>>();
        m.steps_per_run = j.at("steps_per_run").get<std::vector<int>>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.run_seeds = j.at("run_seeds").get<std::vector<std::uint64_t>>();
    } catch (const json::exception& ex) {
        throw DatasetLoadError("dataset: malformed manifest " + file.string() + ": " + ex.what());
    }
    if (m.run_ids.size() != m.steps_per_run.size() || m.run_ids.size() != m.run_seeds.size()) {
        throw DatasetLoadError("dataset: inconsistent per-run arrays in " + file.string());
    }
    return m;
}

void write_thermocouples_csv(const BoundaryRecord& rec, double step_interval,
                             const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetLoadError("dataset: cannot write " + path.string());
    out << "step,time_s,t_center_c,t_wall_c\n";
    for (std::size_t i = 0; i < rec.steps.size(); ++i) {
        out << rec.steps[i] << ',' << format_double(rec.steps[i] * step_interval) << ','
            << format_double(rec.t_center_c[i]) << ',' << format_double(rec.t_wall_c[i]) << '\n';
    }
}

BoundaryRecord read_thermocouples_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetLoadError("dataset: missing file " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("step,time_s,t_center_c,t_wall_c", 0) != 0) {
        throw DatasetLoadError("dataset: bad header in " + path.string());
    }
    BoundaryRecord rec;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        rec.steps.push_back(std::stoi(tok));
        std::getline(ss, tok, ',');  // time_s, reconstructed from the manifest on read
        std::getline(ss, tok, ',');
        rec.t_center_c.push_back(std::stod(tok));
        if (!std::getline(ss, tok, ',')) {
            throw DatasetLoadError("dataset: short row in " + path.string());
        }
        rec.t_wall_c.push_back(std::stod(tok));
    }
    return rec;
}

void write_profiles_csv(const ProfileSeries& series, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetLoadError("dataset: cannot write " + path.string());
    for (int j = 0; j < series.n_grid(); ++j) {
        out << (j > 0 ? "," : "") << format_double(series.r_grid[j]);
    }
    out << '\n';
    for (const auto& row : series.temps) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j > 0 ? "," : "") << format_double(row[j]);
        }
        out << '\n';
    }
}

ProfileSeries read_profiles_csv(const fs::path& path, double step_interval) {
    std::ifstream in(path);
    if (!in) throw DatasetLoadError("dataset: missing file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DatasetLoadError("dataset: empty file " + path.string());

    ProfileSeries series;
    {
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) series.r_grid.push_back(std::stod(tok));
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(series.r_grid.size());
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (row.size() != series.r_grid.size()) {
            throw DatasetLoadError("dataset: ragged row in " + path.string());
        }
        series.times_s.push_back(static_cast<double>(series.temps.size()) * step_interval);
        series.temps.push_back(std::move(row));
    }
    if (series.temps.empty()) throw DatasetLoadError("dataset: no steps in " + path.string());
    return series;
}

json theta_to_json(const CorrectionParams& p) {
    return {{"a0", p.a0}, {"b0", p.b0}, {"aR", p.aR}, {"bR", p.bR}, {"c", p.c}, {"d", p.d}};
}

CorrectionParams theta_from_json(const json& j) {
    CorrectionParams p;
    p.a0 = j.at("a0").get<double>();
    p.b0 = j.at("b0").get<double>();
    p.aR = j.at("aR").get<double>();
    p.bR = j.at("bR").get<double>();
    p.c = j.at("c").get<double>();
    p.d = j.at("d").get<double>();
    return p;
}

}  // namespace

std::filesystem::path DiskDataset::blob_path(const fs::path& root, int run, int step, int tx) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "step_%04d_tx_%02d.f32le", step, tx);
    return root / "waveforms" / ("run_" + run_tag(run)) / buf;
}

void write_dataset(const RunConfig& config, const std::vector<RunData>& runs,
                   const fs::path& dir) {
    fs::create_directories(dir);

    DatasetManifest manifest;
    manifest.provenance = "synthetic";
    manifest.geometry = config.geometry;
    manifest.excitation = config.acoustic.excitation;
    manifest.sample_rate = config.acoustic.sample_rate;
    manifest.n_t = config.acoustic.n_t;
    manifest.step_interval_s = config.thermal.step_interval_s;
    manifest.master_seed = config.seed;
    for (const auto& run : runs) {
        manifest.run_ids.push_back(run.run_id);
        manifest.steps_per_run.push_back(run.sim_profiles.steps());
        manifest.run_seeds.push_back(run.run_seed);
    }

    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw DatasetLoadError("dataset: cannot write " + (dir / "manifest.json").string());
        out << manifest_to_json(manifest).dump(2) << '\n';
    }

    const int n_tx = config.geometry.n_transducers;
    for (const auto& run : runs) {
        write_thermocouples_csv(run.thermocouples, config.thermal.step_interval_s,
                                dir / ("thermocouples_" + run_tag(run.run_id) + ".csv"));
        write_profiles_csv(run.sim_profiles,
                           dir / ("sim_profiles_" + run_tag(run.run_id) + ".csv"));
        fs::create_directories(dir / "waveforms" / ("run_" + run_tag(run.run_id)));
    }

    // every (step, tx) blob holds all receivers in ascending absolute index
    for (const auto& run : runs) {
        const int steps = run.sim_profiles.steps();
        parallel_for(steps * n_tx, [&](int job) {
            const int step = job / n_tx;
            const int tx = job % n_tx;
            std::vector<int> rx_all;
            for (int rx = 0; rx < n_tx; ++rx) {
                if (rx != tx) rx_all.push_back(rx);
            }
            const MeasurementArray m = synthesize_measurement(
                RadialProfile(run.sim_profiles, step), tx, rx_all, config.geometry,
                config.acoustic, measurement_seed(run.run_seed, step, tx), run.variation);

            std::vector<float> row_major(static_cast<std::size_t>(config.acoustic.n_t) *
                                         (n_tx - 1));
            for (int i = 0; i < config.acoustic.n_t; ++i) {
                for (int c = 0; c < n_tx - 1; ++c) {
                    row_major[static_cast<std::size_t>(i) * (n_tx - 1) + c] =
                        static_cast<float>(m.columns[c][i]);
                }
            }
            const fs::path path = DiskDataset::blob_path(dir, run.run_id, step, tx);
            std::ofstream out(path, std::ios::binary);
            if (!out) throw DatasetLoadError("dataset: cannot write " + path.string());
            out.write(reinterpret_cast<const char*>(row_major.data()),
                      static_cast<std::streamsize>(row_major.size() * sizeof(float)));
        });
    }
}

DiskDataset::DiskDataset(const fs::path& dir) : root_(dir) {
    const fs::path mf = dir / "manifest.json";
    std::ifstream in(mf);
    if (!in) throw DatasetLoadError("dataset: missing manifest " + mf.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw DatasetLoadError("dataset: unreadable manifest " + mf.string() + ": " + ex.what());
    }
    manifest_ = manifest_from_json(j, mf);

    const std::size_t expected_blob =
        static_cast<std::size_t>(manifest_.n_t) * (manifest_.geometry.n_transducers - 1) *
        sizeof(float);
    for (std::size_t r = 0; r < manifest_.run_ids.size(); ++r) {
        const int run = manifest_.run_ids[r];
        profiles_.push_back(read_profiles_csv(
            dir / ("sim_profiles_" + run_tag(run) + ".csv"), manifest_.step_interval_s));
        boundaries_.push_back(
            read_thermocouples_csv(dir / ("thermocouples_" + run_tag(run) + ".csv")));
        if (profiles_.back().steps() != manifest_.steps_per_run[r]) {
            throw DatasetLoadError("dataset: sim_profiles_" + run_tag(run) +
                                   ".csv step count disagrees with the manifest");
        }
        for (int step = 0; step < manifest_.steps_per_run[r]; ++step) {
            for (int tx = 0; tx < manifest_.geometry.n_transducers; ++tx) {
                const fs::path bp = blob_path(dir, run, step, tx);
                std::error_code ec;
                const auto size = fs::file_size(bp, ec);
                if (ec) throw DatasetLoadError("dataset: missing blob " + bp.string());
                if (size != expected_blob) {
                    throw DatasetLoadError("dataset: blob " + bp.string() + " has size " +
                                           std::to_string(size) + ", expected " +
                                           std::to_string(expected_blob));
                }
            }
        }
    }

    const fs::path cf = dir / "corrections.json";
    if (fs::exists(cf)) {
        std::ifstream cin(cf);
        json cj;
        try {
            cin >> cj;
            for (const auto& entry : cj.at("runs")) thetas_.push_back(theta_from_json(entry));
        } catch (const json::exception& ex) {
            throw DatasetLoadError("dataset: malformed corrections " + cf.string() + ": " +
                                   ex.what());
        }
        if (thetas_.size() != manifest_.run_ids.size()) {
            throw DatasetLoadError("dataset: corrections.json run count mismatch in " +
                                   cf.string());
        }
    }
}

const CorrectionParams& DiskDataset::theta(int run) const {
    if (thetas_.empty()) {
        throw DatasetLoadError("dataset: corrections.json not found in " + root_.string() +
                               "; run the fit-correction command first");
    }
    return thetas_.at(run);
}

void DiskDataset::write_corrections(const std::vector<CorrectionParams>& thetas) {
    json j;
    j["runs"] = json::array();
    for (const auto& t : thetas) j["runs"].push_back(theta_to_json(t));
    std::ofstream out(root_ / "corrections.json", std::ios::binary);
    if (!out) throw DatasetLoadError("dataset: cannot write corrections.json");
    out << j.dump(2) << '\n';
    thetas_ = thetas;
}

std::vector<double> DiskDataset::read_blob(int run, int step, int tx) const {
    const fs::path path = blob_path(root_, run, step, tx);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetLoadError("dataset: missing blob " + path.string());
    const std::size_t count = static_cast<std::size_t>(manifest_.n_t) *
                              (manifest_.geometry.n_transducers - 1);
    std::vector<float> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw DatasetLoadError("dataset: short read from " + path.string());
    return std::vector<double>(raw.begin(), raw.end());
}

DiskSource::DiskSource(DiskDataset dataset) : dataset_(std::move(dataset)) {
    const int runs = static_cast<int>(dataset_.manifest().run_ids.size());
    corrected_.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        corrected_.push_back(apply_correction(dataset_.sim_profiles(r), dataset_.theta(r)));
    }
}

int DiskSource::n_runs() const { return static_cast<int>(dataset_.manifest().run_ids.size()); }

int DiskSource::n_steps(int run) const { return dataset_.manifest().steps_per_run.at(run); }

int DiskSource::n_transducers() const { return dataset_.manifest().geometry.n_transducers; }

const ProfileSeries& DiskSource::corrected_profiles(int run) const { return corrected_.at(run); }

MeasurementArray DiskSource::raw_measurement(int run, int step, int tx,
                                             const std::vector<int>& rx_indices) const {
    const std::vector<double> blob = dataset_.read_blob(run, step, tx);
    const int n_tx = n_transducers();
    const int n_t = dataset_.manifest().n_t;

    MeasurementArray m;
    m.sample_rate = dataset_.manifest().sample_rate;
    m.tx_index = tx;
    m.rx_indices = rx_indices;
    m.stage = Stage::raw;
    for (int rx : rx_indices) {
        if (rx < 0 || rx >= n_tx || rx == tx) {
            throw std::invalid_argument("DiskSource: invalid rx index");
        }
        const int col = rx < tx ? rx : rx - 1;  // blob columns skip the transmitter
        std::vector<double> column(n_t);
        for (int i = 0; i < n_t; ++i) {
            column[i] = blob[static_cast<std::size_t>(i) * (n_tx - 1) + col];
        }
        m.columns.push_back(std::move(column));
    }
    return m;
}

Waveform DiskSource::excitation() const {
    return make_excitation(dataset_.manifest().excitation, dataset_.manifest().sample_rate);
}

}  // namespace thermoscope
