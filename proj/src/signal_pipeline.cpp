#include "thermoscope/signal_pipeline.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "thermoscope/errors.hpp"
#include "thermoscope/fft.hpp"

namespace thermoscope {

Waveform make_excitation(const ExcitationSpec& spec, double sample_rate) {
    if (spec.center_frequency <= 0 || spec.std_frequency <= 0 || spec.duration <= 0) {
        throw std::invalid_argument("make_excitation: excitation spec fields must be positive");
    }
    if (sample_rate <= 0) throw std::invalid_argument("make_excitation: sample_rate must be positive");

    // spectral std sigma_f maps to a time-domain Gaussian of std 1/(2 pi sigma_f)
    const double sigma_t = 1.0 / (2.0 * std::numbers::pi * spec.std_frequency);
    const double amp = spec.amplitude_vpp / 2.0;
    const double center = spec.duration / 2.0;
    const int n = static_cast<int>(std::ceil(spec.duration * sample_rate)) + 1;

    Waveform w;
    w.sample_rate = sample_rate;
    w.t0 = 0.0;
    w.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate - center;
        w.samples[i] = amp * std::exp(-0.5 * t * t / (sigma_t * sigma_t)) *
                       std::cos(2.0 * std::numbers::pi * spec.center_frequency * t);
    }
    return w;
}

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::raw: return "raw";
        case Stage::cross_correlated: return "cross_correlated";
        case Stage::envelope: return "envelope";
        case Stage::normalized: return "normalized";
    }
    return "unknown";
}

std::vector<int> select_receivers(int tx_index, int n_rx, int n_transducers) {
    if (n_transducers < 4 || n_transducers % 2 != 0) {
        throw std::invalid_argument("select_receivers: n_transducers must be even and >= 4");
    }
    if (tx_index < 0 || tx_index >= n_transducers) {
        throw std::invalid_argument("select_receivers: tx_index out of range");
    }
    if (n_rx % 2 == 0) throw std::invalid_argument("select_receivers: n_rx must be odd");
    if (n_rx < 1 || n_rx > n_transducers - 1) {
        throw std::invalid_argument("select_receivers: n_rx must be in [1, n_transducers-1]");
    }

    std::vector<int> rx(n_rx);
    const int opposite = tx_index + n_transducers / 2;
    const int halfwin = (n_rx - 1) / 2;
    for (int k = -halfwin; k <= halfwin; ++k) {
        rx[k + halfwin] = (opposite + k + n_transducers) % n_transducers;
    }
    return rx;
}

namespace {

void require_stage(const MeasurementArray& m, Stage expected, const char* op) {
    if (m.stage != expected) {
        throw std::invalid_argument(std::string(op) + ": expected stage " + to_string(expected) +
                                    ", got " + to_string(m.stage));
    }
}

}  // namespace

MeasurementArray cross_correlate(const MeasurementArray& measurement, const Waveform& excitation) {
    require_stage(measurement, Stage::raw, "cross_correlate");
    if (measurement.sample_rate != excitation.sample_rate) {
        throw std::invalid_argument("cross_correlate: sample rates differ");
    }
    if (excitation.samples.empty() ||
        excitation.samples.size() > static_cast<std::size_t>(measurement.n_t())) {
        throw std::invalid_argument("cross_correlate: excitation length must be in [1, N_t]");
    }

    MeasurementArray out = measurement;
    for (auto& col : out.columns) {
        col = fft::xcorr_nonneg(col, excitation.samples);
    }
    out.stage = Stage::cross_correlated;
    return out;
}

MeasurementArray hilbert_envelope(const MeasurementArray& measurement) {
    require_stage(measurement, Stage::cross_correlated, "hilbert_envelope");
    if (measurement.n_t() < 4) throw std::invalid_argument("hilbert_envelope: N_t must be >= 4");

    MeasurementArray out = measurement;
    for (auto& col : out.columns) {
        col = fft::analytic_envelope(col);
    }
    out.stage = Stage::envelope;
    return out;
}

MeasurementArray normalize(const MeasurementArray& measurement) {
    require_stage(measurement, Stage::envelope, "normalize");

    MeasurementArray out = measurement;
    for (int c = 0; c < out.n_rx(); ++c) {
        auto& col = out.columns[c];
        const double n = static_cast<double>(col.size());
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= n;
        double sumsq = 0.0;
        for (double v : col) sumsq += (v - mean) * (v - mean);
        if (sumsq <= 0.0) {
            throw DegenerateSignalError(out.rx_indices.empty() ? c : out.rx_indices[c]);
        }
        const double scale = std::sqrt(n) / std::sqrt(sumsq);
        for (double& v : col) v = scale * (v - mean);
    }
    out.stage = Stage::normalized;
    return out;
}

MeasurementArray preprocess(const MeasurementArray& measurement, const Waveform& excitation,
                            int decimation) {
    if (decimation < 1 || measurement.n_t() % decimation != 0) {
        throw std::invalid_argument("preprocess: decimation must divide N_t");
    }

    MeasurementArray env = hilbert_envelope(cross_correlate(measurement, excitation));
    if (decimation > 1) {
        // decimate after envelope extraction; the envelope is slowly varying
        for (auto& col : env.columns) {
            std::vector<double> kept;
            kept.reserve(col.size() / decimation);
            for (std::size_t i = 0; i < col.size(); i += decimation) kept.push_back(col[i]);
            col = std::move(kept);
        }
        env.sample_rate /= decimation;
    }
    return normalize(env);
}

}  // namespace thermoscope
