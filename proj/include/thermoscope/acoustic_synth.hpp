#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "thermoscope/signal_pipeline.hpp"
#include "thermoscope/thermal_model.hpp"

namespace thermoscope {

// 16 transducers evenly spaced around a 144 mm ID, 6.4 mm wall container.
struct RingGeometry {
    int n_transducers = 16;
    double inner_radius_m = 0.072;
    double wall_thickness_m = 0.0064;
    double height_m = 0.200;

    void validate() const;
    // transducer angle on the ring
    double angle(int index) const;
};

struct AcousticConfig {
    double sound_speed_ref_m_s = 2200.0;  // c0 at ref_temp
    double temp_coefficient = 2.0;        // (m/s)/°C, speed decreases as T rises
    double ref_temp_c = 20.0;
    double guided_speed_m_s = 3100.0;
    double bulk_attenuation_np_m = 10.0;
    double guided_amplitude_ratio = 2.0;  // guided arrivals dominate the raw record
    double noise_snr_db = 20.0;           // >= 200 disables noise
    ExcitationSpec excitation;
    double sample_rate = 5.0e6;
    int n_t = 2048;

    void validate() const;
};

// Radial profile as a callable r -> °C; wraps one step of a ProfileSeries.
class RadialProfile {
public:
    RadialProfile(const ProfileSeries& series, int step) : series_(&series), step_(step) {}
    explicit RadialProfile(std::function<double(double)> fn) : fn_(std::move(fn)) {}

    double operator()(double r) const { return fn_ ? fn_(r) : series_->temp_at(step_, r); }

private:
    const ProfileSeries* series_ = nullptr;
    int step_ = 0;
    std::function<double(double)> fn_;
};

// c(T) = c0 - k_c (T - T_ref), floored at 0.2 c0.
double sound_speed(double temp_c, const AcousticConfig& config);

// Straight-chord travel time through the temperature field (composite
// Simpson, 257 points).
double chord_tof(int tx, int rx, const RadialProfile& profile, const RingGeometry& geometry,
                 const AcousticConfig& config);

// Shorter circumferential arc along the mid-wall circle / guided speed.
double guided_tof(int tx, int rx, const RingGeometry& geometry, const AcousticConfig& config);

// Per-transducer transfer-function spread: gain in [0.7, 1.3] and extra delay
// in [0, 2] us, fixed for one heating run. This is what makes the
// leave-one-transmitter-set-out validation non-trivial.
struct TransducerVariation {
    std::vector<double> gain;
    std::vector<double> delay_s;

    static TransducerVariation none(int n_transducers);
};

TransducerVariation draw_transducer_variation(std::uint64_t run_seed, int n_transducers);

// Raw synthetic record for one transmitter: per receiver a bulk burst at
// chord_tof (attenuated), a guided burst at guided_tof, and seeded white
// noise at noise_snr_db relative to the bulk arrival RMS. Column noise is
// seeded per receiver index, so any receiver subset sees identical samples.
MeasurementArray synthesize_measurement(const RadialProfile& profile, int tx,
                                        const std::vector<int>& rx_indices,
                                        const RingGeometry& geometry, const AcousticConfig& config,
                                        std::uint64_t rng_seed,
                                        const TransducerVariation& variation);

MeasurementArray synthesize_measurement(const RadialProfile& profile, int tx,
                                        const std::vector<int>& rx_indices,
                                        const RingGeometry& geometry, const AcousticConfig& config,
                                        std::uint64_t rng_seed);

}  // namespace thermoscope
