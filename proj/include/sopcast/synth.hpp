#pragma once

#include <cstdint>
#include <utility>

#include "sopcast/series.hpp"

namespace sopcast {

/// Generator parameters. The defaults are calibrated so that a 10-day run
/// lands on the target mean/std and reproduces the qualitative regimes the
/// pipeline is built for: wind drives fast fluctuations, temperature and
/// humidity drive slow drift.
struct SynthConfig {
    double duration_seconds = 864000.0; ///< 10 days
    double start_time = 1609459200.0;   ///< 2021-01-01T00:00:00Z
    double base_level = 211.0;          ///< target SOP mean, rad/s
    double noise_std = 2.0;

    // Coupling gains.
    double wind_gain = 0.8;      ///< direct gust level coupling
    double temp_gain = 5.0;      ///< per deg C
    double humidity_gain = 1.8;  ///< per %RH

    // Wind-driven aeolian vibration: an oscillation whose frequency tracks
    // the interpolated gust level (calm period down to windy period) while
    // the amplitude follows an independent slow lognormal envelope.
    double vibration_amplitude = 46.0;
    double vibration_period_calm = 150.0;   ///< seconds, zero-wind limit
    double vibration_period_windy = 70.0;   ///< seconds, high-wind limit
    double vibration_gust_scale = 10.0;     ///< gust level of the frequency ramp
    double vibration_phase_jitter = 0.02;   ///< rad per 1 s step
    double vibration_envelope_std = 0.4;    ///< lognormal sigma
    double vibration_envelope_tau = 900.0;  ///< envelope correlation time, s

    // Deterministic slow drift (seeded phase).
    double drift_amplitude = 16.0;
    double drift_period = 216000.0; ///< 2.5 days

    // Untracked slow wander: mean-reverting noise whose power overlaps the
    // vibration band, so the vibration amplitude cannot be read off the
    // trace alone.
    double wander_std = 8.0;
    double wander_tau = 250.0; ///< correlation time, seconds

    // Wind gust process on the 30-min grid: baseline plus Poisson bursts
    // with exponential amplitudes that decay geometrically.
    double wind_base = 3.0;
    double burst_rate_per_day = 12.0;
    double burst_amplitude_mean = 6.0;
    double burst_retention = 0.7; ///< per 30-min step

    // Weather channels: diurnal sinusoid plus AR(1) wander (humidity runs
    // anti-phase to temperature).
    double diurnal_period = 86400.0;
    double temp_mean = 15.0;
    double temp_diurnal_amplitude = 6.0;
    double temp_ar_coeff = 0.99;
    double temp_ar_std = 0.45;
    double humidity_mean = 68.0;
    double humidity_diurnal_amplitude = 12.0;
    double humidity_ar_coeff = 0.99;
    double humidity_ar_std = 0.9;

    void validate() const;
};

struct SummaryStats {
    double mean = 0.0;
    double std = 0.0; ///< population
    double min = 0.0;
    double max = 0.0;
};

/// Coupled synthetic dataset: SOP change at 1 s and weather at 30 min.
/// Bit-identical output for identical (cfg, seed).
std::pair<UniformSeries, WeatherTable> generate(const SynthConfig& cfg, std::uint64_t seed);

SummaryStats summary_stats(const UniformSeries& s);

} // namespace sopcast
