#pragma once

#include <string>
#include <vector>

namespace thermoscope {

struct Waveform {
    std::vector<double> samples;
    double sample_rate = 5.0e6;  // Hz
    double t0 = 0.0;             // excitation onset, seconds
};

// Gaussian excitation burst: 350 kHz center, 150 kHz spectral std, 10 Vpp.
struct ExcitationSpec {
    double center_frequency = 350.0e3;  // Hz
    double std_frequency = 150.0e3;     // Hz (spectral standard deviation)
    double amplitude_vpp = 10.0;        // volts peak-to-peak
    double duration = 8.0e-6;           // seconds of excitation record
};

// Time-domain realization of the burst, centered in its record.
Waveform make_excitation(const ExcitationSpec& spec, double sample_rate);

enum class Stage { raw, cross_correlated, envelope, normalized };

std::string to_string(Stage stage);

// N_t x N_Rx array of waveforms from one transmitter; columns follow the
// geometric receiver order produced by select_receivers.
struct MeasurementArray {
    std::vector<std::vector<double>> columns;  // n_rx columns of length n_t
    double sample_rate = 5.0e6;
    int tx_index = 0;
    std::vector<int> rx_indices;
    Stage stage = Stage::raw;

    int n_t() const { return columns.empty() ? 0 : static_cast<int>(columns.front().size()); }
    int n_rx() const { return static_cast<int>(columns.size()); }
};

// An odd window of receivers centered on the transducer diametrically
// opposite tx, in ascending window order so adjacent columns are physically
// adjacent on the ring.
std::vector<int> select_receivers(int tx_index, int n_rx, int n_transducers = 16);

// X_cc = X_w * x_e per column, linear correlation, non-negative lags only.
MeasurementArray cross_correlate(const MeasurementArray& measurement, const Waveform& excitation);

// X_e = |H(X_cc)| per column.
MeasurementArray hilbert_envelope(const MeasurementArray& measurement);

// X = sqrt(N_t) (X_e - mean) / sqrt(sum (X_e - mean)^2) per column.
MeasurementArray normalize(const MeasurementArray& measurement);

// cross_correlate -> hilbert_envelope -> decimate -> normalize.
MeasurementArray preprocess(const MeasurementArray& measurement, const Waveform& excitation,
                            int decimation);

}  // namespace thermoscope
