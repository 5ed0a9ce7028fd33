#include "sopcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sopcast/rng.hpp"
#include "sopcast/stats.hpp"

namespace sopcast {

namespace {

constexpr double kWeatherStep = 1800.0;
constexpr double kTwoPi = 2.0 * M_PI;

// 30-min samples needed so that linear interpolation brackets every 1 s
// sample in [0, n_seconds).
std::size_t weather_points(std::size_t n_seconds) {
    return (n_seconds - 1) / 1800 + 2;
}

std::vector<double> ar1_diurnal(std::size_t count, double mean, double amplitude, double sign,
                                double period, double ar_coeff, double ar_std, Rng& rng) {
    std::vector<double> out(count);
    double ar = ar_std / std::sqrt(1.0 - ar_coeff * ar_coeff) * rng.normal();
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) * kWeatherStep;
        out[k] = mean + sign * amplitude * std::sin(kTwoPi * t / period) + ar;
        ar = ar_coeff * ar + ar_std * rng.normal();
    }
    return out;
}

} // namespace

void SynthConfig::validate() const {
    const double min_duration = (48 + 24) * kWeatherStep;
    if (duration_seconds < min_duration)
        throw std::invalid_argument("SynthConfig: duration must cover at least " +
                                    std::to_string(static_cast<long long>(min_duration)) +
                                    " seconds of long-scale history");
    const double gains[] = {noise_std,       wind_gain,      temp_gain,
                            humidity_gain,   vibration_amplitude, drift_amplitude,
                            burst_rate_per_day, burst_amplitude_mean, wind_base,
                            temp_diurnal_amplitude, temp_ar_std,
                            humidity_diurnal_amplitude, humidity_ar_std,
                            vibration_phase_jitter, vibration_envelope_std, wander_std};
    for (double g : gains)
        if (g < 0.0) throw std::invalid_argument("SynthConfig: gains and amplitudes must be >= 0");
    if (drift_period <= 0.0 || diurnal_period <= 0.0 || wander_tau <= 0.0 ||
        vibration_envelope_tau <= 0.0 || vibration_gust_scale <= 0.0)
        throw std::invalid_argument("SynthConfig: periods must be positive");
    if (vibration_period_windy <= 0.0 || vibration_period_windy > vibration_period_calm)
        throw std::invalid_argument(
            "SynthConfig: vibration periods must satisfy 0 < windy <= calm");
    if (temp_ar_coeff < 0.0 || temp_ar_coeff >= 1.0 || humidity_ar_coeff < 0.0 ||
        humidity_ar_coeff >= 1.0)
        throw std::invalid_argument("SynthConfig: AR coefficients must be in [0, 1)");
    if (burst_retention < 0.0 || burst_retention >= 1.0)
        throw std::invalid_argument("SynthConfig: burst retention must be in [0, 1)");
}

std::pair<UniformSeries, WeatherTable> generate(const SynthConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(std::llround(cfg.duration_seconds));
    const std::size_t k_points = weather_points(n);

    // Fixed draw order: one master stream hands a sub-seed to each
    // component so the streams stay independent and reproducible.
    Rng master(seed);
    Rng temp_rng(master.next_u64());
    Rng hum_rng(master.next_u64());
    Rng wind_rng(master.next_u64());
    Rng vib_rng(master.next_u64());
    Rng wander_rng(master.next_u64());
    Rng noise_rng(master.next_u64());
    const double drift_phase = master.uniform(0.0, kTwoPi);

    const auto temperature =
        ar1_diurnal(k_points, cfg.temp_mean, cfg.temp_diurnal_amplitude, 1.0, cfg.diurnal_period,
                    cfg.temp_ar_coeff, cfg.temp_ar_std, temp_rng);
    const auto humidity =
        ar1_diurnal(k_points, cfg.humidity_mean, cfg.humidity_diurnal_amplitude, -1.0,
                    cfg.diurnal_period, cfg.humidity_ar_coeff, cfg.humidity_ar_std, hum_rng);

    std::vector<double> gust(k_points);
    const double event_rate = cfg.burst_rate_per_day / (86400.0 / kWeatherStep);
    double burst = 0.0;
    for (std::size_t k = 0; k < k_points; ++k) {
        burst *= cfg.burst_retention;
        const std::uint64_t events = wind_rng.poisson(event_rate);
        for (std::uint64_t e = 0; e < events; ++e)
            burst += wind_rng.exponential() * cfg.burst_amplitude_mean;
        gust[k] = cfg.wind_base + burst;
    }

    const double gust_mean = mean_of(gust);
    const double temp_mean_emp = mean_of(temperature);
    const double hum_mean_emp = mean_of(humidity);

    UniformSeries sop;
    sop.start_time = cfg.start_time;
    sop.step = 1.0;
    sop.unit = "rad/s";
    sop.values.resize(n);
    double phase = vib_rng.uniform(0.0, kTwoPi);
    const double freq_calm = 1.0 / cfg.vibration_period_calm;
    const double freq_windy = 1.0 / cfg.vibration_period_windy;
    const double env_coeff = std::exp(-1.0 / cfg.vibration_envelope_tau);
    const double env_step =
        cfg.vibration_envelope_std * std::sqrt(1.0 - env_coeff * env_coeff);
    const double env_center = 0.5 * cfg.vibration_envelope_std * cfg.vibration_envelope_std;
    double env = cfg.vibration_envelope_std * vib_rng.normal();
    const double wander_coeff = std::exp(-1.0 / cfg.wander_tau);
    const double wander_step = cfg.wander_std * std::sqrt(1.0 - wander_coeff * wander_coeff);
    double wander = cfg.wander_std * wander_rng.normal();
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t seg = t / 1800;
        const double frac = static_cast<double>(t % 1800) / 1800.0;
        const double g = gust[seg] + (gust[seg + 1] - gust[seg]) * frac;
        const double temp = temperature[seg] + (temperature[seg + 1] - temperature[seg]) * frac;
        const double hum = humidity[seg] + (humidity[seg + 1] - humidity[seg]) * frac;
        const double freq =
            freq_calm + (freq_windy - freq_calm) * (1.0 - std::exp(-g / cfg.vibration_gust_scale));
        phase += kTwoPi * freq + cfg.vibration_phase_jitter * vib_rng.normal();
        env = env_coeff * env + env_step * vib_rng.normal();
        const double amplitude = cfg.vibration_amplitude * std::exp(env - env_center);
        const double drift =
            cfg.drift_amplitude * std::sin(kTwoPi * static_cast<double>(t) / cfg.drift_period +
                                           drift_phase);
        sop.values[t] = cfg.base_level + cfg.wind_gain * (g - gust_mean) +
                        cfg.temp_gain * (temp - temp_mean_emp) +
                        cfg.humidity_gain * (hum - hum_mean_emp) + drift + wander +
                        amplitude * std::sin(phase) +
                        cfg.noise_std * noise_rng.normal();
        wander = wander_coeff * wander + wander_step * wander_rng.normal();
    }

    WeatherTable weather;
    weather.start_time = cfg.start_time;
    weather.step = kWeatherStep;
    weather.names = {"wind_gust", "temperature", "humidity"};
    weather.columns = {gust, temperature, humidity};
    weather.validate();
    return {std::move(sop), std::move(weather)};
}

SummaryStats summary_stats(const UniformSeries& s) {
    if (s.empty()) throw std::invalid_argument("summary_stats: empty series");
    SummaryStats out;
    out.mean = mean_of(s.values);
    out.std = population_std(s.values);
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    out.min = *lo;
    out.max = *hi;
    return out;
}

} // namespace sopcast
