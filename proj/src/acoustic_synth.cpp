#include "thermoscope/acoustic_synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "thermoscope/errors.hpp"
#include "thermoscope/rng.hpp"

namespace thermoscope {

void RingGeometry::validate() const {
    if (n_transducers < 4 || n_transducers % 2 != 0) {
        throw std::invalid_argument("RingGeometry: n_transducers must be even and >= 4");
    }
    if (inner_radius_m <= 0 || wall_thickness_m <= 0 || height_m <= 0) {
        throw std::invalid_argument("RingGeometry: lengths must be > 0");
    }
}

double RingGeometry::angle(int index) const {
    return 2.0 * std::numbers::pi * static_cast<double>(index) / static_cast<double>(n_transducers);
}

void AcousticConfig::validate() const {
    if (sound_speed_ref_m_s <= 0) throw std::invalid_argument("AcousticConfig: c0 must be > 0");
    if (guided_speed_m_s <= 0) throw std::invalid_argument("AcousticConfig: guided_speed must be > 0");
    if (guided_amplitude_ratio < 0) {
        throw std::invalid_argument("AcousticConfig: guided_amplitude_ratio must be >= 0");
    }
    if (sample_rate <= 0 || n_t < 2) throw std::invalid_argument("AcousticConfig: bad sampling");
}

double sound_speed(double temp_c, const AcousticConfig& config) {
    const double c = config.sound_speed_ref_m_s -
                     config.temp_coefficient * (temp_c - config.ref_temp_c);
    return std::max(c, 0.2 * config.sound_speed_ref_m_s);
}

double chord_tof(int tx, int rx, const RadialProfile& profile, const RingGeometry& geometry,
                 const AcousticConfig& config) {
    if (tx == rx) throw std::invalid_argument("chord_tof: tx and rx must differ");

    const double R = geometry.inner_radius_m;
    const double a0 = geometry.angle(tx);
    const double a1 = geometry.angle(rx);
    const double x0 = R * std::cos(a0), y0 = R * std::sin(a0);
    const double x1 = R * std::cos(a1), y1 = R * std::sin(a1);
    const double length = std::hypot(x1 - x0, y1 - y0);

    // slowness integral along the chord, composite Simpson with 257 points
    constexpr int kPoints = 257;
    const double ds = 1.0 / static_cast<double>(kPoints - 1);
    double sum = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        const double s = static_cast<double>(i) * ds;
        const double x = x0 + s * (x1 - x0);
        const double y = y0 + s * (y1 - y0);
        const double r = std::hypot(x, y);
        const double slowness = 1.0 / sound_speed(profile(r), config);
        const double w = (i == 0 || i == kPoints - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * slowness;
    }
    return length * sum * ds / 3.0;
}

double guided_tof(int tx, int rx, const RingGeometry& geometry, const AcousticConfig& config) {
    if (tx == rx) throw std::invalid_argument("guided_tof: tx and rx must differ");
    const int n = geometry.n_transducers;
    const int sep = std::abs(tx - rx) % n;
    const int hops = std::min(sep, n - sep);
    const double mid_radius = geometry.inner_radius_m + geometry.wall_thickness_m / 2.0;
    const double arc = 2.0 * std::numbers::pi * mid_radius * static_cast<double>(hops) /
                       static_cast<double>(n);
    return arc / config.guided_speed_m_s;
}

TransducerVariation TransducerVariation::none(int n_transducers) {
    TransducerVariation v;
    v.gain.assign(n_transducers, 1.0);
    v.delay_s.assign(n_transducers, 0.0);
    return v;
}

TransducerVariation draw_transducer_variation(std::uint64_t run_seed, int n_transducers) {
    Rng rng(derive_seed(run_seed, 0x7fa2u));
    TransducerVariation v;
    v.gain.resize(n_transducers);
    v.delay_s.resize(n_transducers);
    for (int i = 0; i < n_transducers; ++i) {
        v.gain[i] = rng.uniform(0.7, 1.3);
        v.delay_s[i] = rng.uniform(0.0, 2.0e-6);
    }
    return v;
}

namespace {

// adds a Gaussian burst centered at t_center; returns its RMS over +-3 sigma
double add_burst(std::vector<double>& column, double sample_rate, const ExcitationSpec& spec,
                 double t_center, double amplitude) {
    const double sigma_t = 1.0 / (2.0 * std::numbers::pi * spec.std_frequency);
    const double peak = amplitude * spec.amplitude_vpp / 2.0;
    const int n = static_cast<int>(column.size());
    const int lo = std::max(0, static_cast<int>(std::floor((t_center - 5.0 * sigma_t) * sample_rate)));
    const int hi = std::min(n - 1, static_cast<int>(std::ceil((t_center + 5.0 * sigma_t) * sample_rate)));

    double energy = 0.0;
    int support = 0;
    for (int i = lo; i <= hi; ++i) {
        const double t = static_cast<double>(i) / sample_rate - t_center;
        const double v = peak * std::exp(-0.5 * t * t / (sigma_t * sigma_t)) *
                         std::cos(2.0 * std::numbers::pi * spec.center_frequency * t);
        column[i] += v;
        if (std::abs(t) <= 3.0 * sigma_t) {
            energy += v * v;
            ++support;
        }
    }
    return support > 0 ? std::sqrt(energy / static_cast<double>(support)) : 0.0;
}

}  // namespace

MeasurementArray synthesize_measurement(const RadialProfile& profile, int tx,
                                        const std::vector<int>& rx_indices,
                                        const RingGeometry& geometry, const AcousticConfig& config,
                                        std::uint64_t rng_seed,
                                        const TransducerVariation& variation) {
    geometry.validate();
    config.validate();
    if (tx < 0 || tx >= geometry.n_transducers) {
        throw std::invalid_argument("synthesize_measurement: tx out of range");
    }

    MeasurementArray m;
    m.sample_rate = config.sample_rate;
    m.tx_index = tx;
    m.rx_indices = rx_indices;
    m.stage = Stage::raw;
    m.columns.reserve(rx_indices.size());

    const double record_s = static_cast<double>(config.n_t - 1) / config.sample_rate;
    const double sigma_t = 1.0 / (2.0 * std::numbers::pi * config.excitation.std_frequency);

    for (int rx : rx_indices) {
        if (rx < 0 || rx >= geometry.n_transducers || rx == tx) {
            throw std::invalid_argument("synthesize_measurement: invalid rx index");
        }
        const double pair_gain = variation.gain[tx] * variation.gain[rx];
        const double pair_delay = variation.delay_s[tx] + variation.delay_s[rx];

        const double t_bulk = chord_tof(tx, rx, profile, geometry, config) + pair_delay;
        const double t_guided = guided_tof(tx, rx, geometry, config) + pair_delay;
        const double latest = std::max(t_bulk, t_guided);
        if (latest + 3.0 * sigma_t > record_s) {
            throw RecordOverflowError(tx, rx, latest, record_s);
        }

        const double a0 = geometry.angle(tx);
        const double a1 = geometry.angle(rx);
        const double chord_len = std::hypot(std::cos(a1) - std::cos(a0), std::sin(a1) - std::sin(a0)) *
                                 geometry.inner_radius_m;
        // the guided path stays in the low-loss wall, so it skips the bulk attenuation
        const double bulk_amp = pair_gain * std::exp(-config.bulk_attenuation_np_m * chord_len);
        const double guided_amp = pair_gain * config.guided_amplitude_ratio;

        std::vector<double> col(config.n_t, 0.0);
        const double bulk_rms = add_burst(col, config.sample_rate, config.excitation, t_bulk, bulk_amp);
        add_burst(col, config.sample_rate, config.excitation, t_guided, guided_amp);

        if (config.noise_snr_db < 200.0 && bulk_rms > 0.0) {
            const double noise_std = bulk_rms / std::pow(10.0, config.noise_snr_db / 20.0);
            Rng noise(derive_seed(rng_seed, static_cast<std::uint64_t>(rx)));
            for (double& v : col) v += noise.normal(0.0, noise_std);
        }
        m.columns.push_back(std::move(col));
    }
    return m;
}

MeasurementArray synthesize_measurement(const RadialProfile& profile, int tx,
                                        const std::vector<int>& rx_indices,
                                        const RingGeometry& geometry, const AcousticConfig& config,
                                        std::uint64_t rng_seed) {
    return synthesize_measurement(profile, tx, rx_indices, geometry, config, rng_seed,
                                  TransducerVariation::none(geometry.n_transducers));
}

}  // namespace thermoscope
