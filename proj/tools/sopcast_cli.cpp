#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sopcast/csv.hpp"
#include "sopcast/forecast.hpp"
#include "sopcast/fusion.hpp"
#include "sopcast/harness.hpp"
#include "sopcast/neural.hpp"
#include "sopcast/series.hpp"
#include "sopcast/synth.hpp"
#include "sopcast/wavelet.hpp"

namespace {

using namespace sopcast;

constexpr double kGridTol = 1e-6;

/// Everything a subcommand can draw from the config file; flags override
/// individual fields after the file is applied.
struct RunConfig {
    std::string sop_path;
    std::string weather_path;
    std::string out_path;
    std::uint64_t seed = 42;
    BenchmarkConfig bench;
    SynthConfig synth;
    double fusion_threshold = 0.0; ///< 0 means "derive from the percentile"
    double fusion_threshold_percentile = 75.0;
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

double num_value(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw std::runtime_error("config: invalid number for '" + key + "'");
    }
}

long long int_value(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw std::runtime_error("config: invalid integer for '" + key + "'");
    }
}

std::uint64_t u64_value(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw std::runtime_error("config: invalid seed for '" + key + "'");
    }
}

std::vector<std::string> list_value(const std::string& value) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin <= value.size()) {
        const auto comma = value.find(',', begin);
        const auto end = comma == std::string::npos ? value.size() : comma;
        const auto item = trim(value.substr(begin, end - begin));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    return out;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(line_no) +
                                     ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: line " + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

bool apply_forecast_key(ForecastConfig& fc, const std::string& field, const std::string& key,
                        const std::string& value) {
    if (field == "window")
        fc.window = static_cast<int>(int_value(key, value));
    else if (field == "horizon")
        fc.horizon = static_cast<int>(int_value(key, value));
    else if (field == "levels")
        fc.levels = static_cast<int>(int_value(key, value));
    else if (field == "step")
        fc.step = num_value(key, value);
    else if (field == "ema_alpha")
        fc.ema_alpha = num_value(key, value);
    else if (field == "exogenous")
        fc.exogenous = list_value(value);
    else
        return false;
    return true;
}

bool apply_synth_key(SynthConfig& sc, const std::string& field, const std::string& key,
                     const std::string& value) {
    double* slot = nullptr;
    if (field == "duration_seconds") slot = &sc.duration_seconds;
    else if (field == "start_time") slot = &sc.start_time;
    else if (field == "base_level") slot = &sc.base_level;
    else if (field == "noise_std") slot = &sc.noise_std;
    else if (field == "wind_gain") slot = &sc.wind_gain;
    else if (field == "temp_gain") slot = &sc.temp_gain;
    else if (field == "humidity_gain") slot = &sc.humidity_gain;
    else if (field == "vibration_amplitude") slot = &sc.vibration_amplitude;
    else if (field == "vibration_period_calm") slot = &sc.vibration_period_calm;
    else if (field == "vibration_period_windy") slot = &sc.vibration_period_windy;
    else if (field == "vibration_gust_scale") slot = &sc.vibration_gust_scale;
    else if (field == "vibration_phase_jitter") slot = &sc.vibration_phase_jitter;
    else if (field == "vibration_envelope_std") slot = &sc.vibration_envelope_std;
    else if (field == "vibration_envelope_tau") slot = &sc.vibration_envelope_tau;
    else if (field == "drift_amplitude") slot = &sc.drift_amplitude;
    else if (field == "drift_period") slot = &sc.drift_period;
    else if (field == "wander_std") slot = &sc.wander_std;
    else if (field == "wander_tau") slot = &sc.wander_tau;
    else if (field == "wind_base") slot = &sc.wind_base;
    else if (field == "burst_rate_per_day") slot = &sc.burst_rate_per_day;
    else if (field == "burst_amplitude_mean") slot = &sc.burst_amplitude_mean;
    else if (field == "burst_retention") slot = &sc.burst_retention;
    else if (field == "diurnal_period") slot = &sc.diurnal_period;
    else if (field == "temp_mean") slot = &sc.temp_mean;
    else if (field == "temp_diurnal_amplitude") slot = &sc.temp_diurnal_amplitude;
    else if (field == "temp_ar_coeff") slot = &sc.temp_ar_coeff;
    else if (field == "temp_ar_std") slot = &sc.temp_ar_std;
    else if (field == "humidity_mean") slot = &sc.humidity_mean;
    else if (field == "humidity_diurnal_amplitude") slot = &sc.humidity_diurnal_amplitude;
    else if (field == "humidity_ar_coeff") slot = &sc.humidity_ar_coeff;
    else if (field == "humidity_ar_std") slot = &sc.humidity_ar_std;
    else return false;
    *slot = num_value(key, value);
    return true;
}

void apply_key_values(RunConfig& rc, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        const auto dot = key.find('.');
        const auto prefix = dot == std::string::npos ? key : key.substr(0, dot);
        const auto field = dot == std::string::npos ? std::string() : key.substr(dot + 1);
        if (key == "sop") rc.sop_path = value;
        else if (key == "weather") rc.weather_path = value;
        else if (key == "out") rc.out_path = value;
        else if (key == "seed") rc.seed = u64_value(key, value);
        else if (key == "wiring") rc.bench.wiring_policy = wiring_policy_from_string(value);
        else if (prefix == "short" && apply_forecast_key(rc.bench.short_config, field, key, value)) {}
        else if (prefix == "long" && apply_forecast_key(rc.bench.long_config, field, key, value)) {}
        else if (prefix == "synth" && apply_synth_key(rc.synth, field, key, value)) {}
        else if (key == "train.learning_rate") rc.bench.train.learning_rate = num_value(key, value);
        else if (key == "train.batch_size")
            rc.bench.train.batch_size = static_cast<std::size_t>(int_value(key, value));
        else if (key == "train.max_epochs")
            rc.bench.train.max_epochs = static_cast<int>(int_value(key, value));
        else if (key == "train.patience")
            rc.bench.train.patience = static_cast<int>(int_value(key, value));
        else if (key == "train.validation_fraction")
            rc.bench.train.validation_fraction = num_value(key, value);
        else if (key == "train.hidden_units")
            rc.bench.train.hidden_units = static_cast<std::size_t>(int_value(key, value));
        else if (key == "train.seed") rc.bench.train.seed = u64_value(key, value);
        else if (key == "bench.test_fraction") rc.bench.test_fraction = num_value(key, value);
        else if (key == "bench.short_train_stride")
            rc.bench.short_train_stride = static_cast<int>(int_value(key, value));
        else if (key == "bench.long_train_stride")
            rc.bench.long_train_stride = static_cast<int>(int_value(key, value));
        else if (key == "bench.short_eval_stride")
            rc.bench.short_eval_stride = static_cast<int>(int_value(key, value));
        else if (key == "bench.long_eval_stride")
            rc.bench.long_eval_stride = static_cast<int>(int_value(key, value));
        else if (key == "fusion.threshold") rc.fusion_threshold = num_value(key, value);
        else if (key == "fusion.threshold_percentile")
            rc.fusion_threshold_percentile = num_value(key, value);
        else
            throw std::runtime_error("config: unknown key '" + key + "'");
    }
}

RunConfig load_run_config(const std::string& config_path) {
    RunConfig rc;
    if (!config_path.empty()) apply_key_values(rc, read_key_values(config_path));
    return rc;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return nlohmann::json::parse(in);
}

std::string ensure_out_dir(const std::string& out) {
    if (out.empty()) throw std::runtime_error("an output directory is required (--out)");
    std::filesystem::create_directories(out);
    return out;
}

std::filesystem::path out_file(const std::string& dir, const std::string& name) {
    return std::filesystem::path(dir) / name;
}

/// Weather channels resampled onto `step` across the table's own range.
WeatherTable resample_weather(const WeatherTable& w, double step) {
    w.validate();
    WeatherTable out;
    out.names = w.names;
    out.columns.reserve(w.names.size());
    for (const auto& col : w.columns) {
        UniformSeries channel;
        channel.start_time = w.start_time;
        channel.step = w.step;
        channel.values = col;
        auto resampled = resample_linear(channel, step);
        out.start_time = resampled.start_time;
        out.step = resampled.step;
        out.columns.push_back(std::move(resampled.values));
    }
    return out;
}

/// Channel values from `start_time` (which must sit on the table's grid) to
/// the end of the table.
std::vector<double> channel_from(const WeatherTable& w, const std::string& name,
                                 double start_time) {
    const auto& col = w.channel(name);
    const double offset = (start_time - w.start_time) / w.step;
    const auto idx = static_cast<long long>(std::llround(offset));
    if (std::abs(offset - static_cast<double>(idx)) > kGridTol || idx < 0 ||
        idx >= static_cast<long long>(col.size()))
        throw std::runtime_error("weather data does not cover t=" + format_number(start_time) +
                                 " on channel '" + name + "'");
    return {col.begin() + static_cast<std::ptrdiff_t>(idx), col.end()};
}

/// Denoises at the native step, then reduces to the config step by block
/// averaging.
UniformSeries series_at_scale(const UniformSeries& sop, const ForecastConfig& fc) {
    const auto denoised = ema_denoise(sop, fc.ema_alpha);
    const double ratio = fc.step / denoised.step;
    const auto factor = static_cast<int>(std::llround(ratio));
    if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > kGridTol)
        throw std::runtime_error("config step " + format_number(fc.step) +
                                 " is not an integer multiple of the data step " +
                                 format_number(denoised.step));
    return factor == 1 ? denoised : block_average(denoised, factor);
}

nlohmann::json synth_to_json(const SynthConfig& sc) {
    return nlohmann::json{{"duration_seconds", sc.duration_seconds},
                          {"start_time", sc.start_time},
                          {"base_level", sc.base_level},
                          {"noise_std", sc.noise_std},
                          {"wind_gain", sc.wind_gain},
                          {"temp_gain", sc.temp_gain},
                          {"humidity_gain", sc.humidity_gain},
                          {"vibration_amplitude", sc.vibration_amplitude},
                          {"vibration_period_calm", sc.vibration_period_calm},
                          {"vibration_period_windy", sc.vibration_period_windy},
                          {"vibration_gust_scale", sc.vibration_gust_scale},
                          {"vibration_phase_jitter", sc.vibration_phase_jitter},
                          {"vibration_envelope_std", sc.vibration_envelope_std},
                          {"vibration_envelope_tau", sc.vibration_envelope_tau},
                          {"drift_amplitude", sc.drift_amplitude},
                          {"drift_period", sc.drift_period},
                          {"wander_std", sc.wander_std},
                          {"wander_tau", sc.wander_tau},
                          {"wind_base", sc.wind_base},
                          {"burst_rate_per_day", sc.burst_rate_per_day},
                          {"burst_amplitude_mean", sc.burst_amplitude_mean},
                          {"burst_retention", sc.burst_retention},
                          {"diurnal_period", sc.diurnal_period},
                          {"temp_mean", sc.temp_mean},
                          {"temp_diurnal_amplitude", sc.temp_diurnal_amplitude},
                          {"temp_ar_coeff", sc.temp_ar_coeff},
                          {"temp_ar_std", sc.temp_ar_std},
                          {"humidity_mean", sc.humidity_mean},
                          {"humidity_diurnal_amplitude", sc.humidity_diurnal_amplitude},
                          {"humidity_ar_coeff", sc.humidity_ar_coeff},
                          {"humidity_ar_std", sc.humidity_ar_std}};
}

int cmd_synth(const RunConfig& rc) {
    const auto dir = ensure_out_dir(rc.out_path);
    const auto [sop, weather] = generate(rc.synth, rc.seed);
    write_sop_csv(out_file(dir, "sop.csv").string(), sop);
    write_weather_csv(out_file(dir, "weather.csv").string(), weather);
    const nlohmann::json meta{{"seed", rc.seed}, {"config", synth_to_json(rc.synth)}};
    write_text(out_file(dir, "synth_meta.json").string(), meta.dump(2) + "\n");
    const auto stats = summary_stats(sop);
    std::cout << "wrote " << out_file(dir, "sop.csv").string() << " (" << sop.size()
              << " samples, mean " << format_number(stats.mean) << ", std "
              << format_number(stats.std) << ")\n";
    std::cout << "wrote " << out_file(dir, "weather.csv").string() << " (" << weather.rows()
              << " rows)\n";
    std::cout << "wrote " << out_file(dir, "synth_meta.json").string() << " (seed " << rc.seed
              << ")\n";
    return 0;
}

ForecasterBundle train_scale(const RunConfig& rc, const UniformSeries& sop,
                             const WeatherTable& weather, const ForecastConfig& fc, int stride) {
    const auto series = series_at_scale(sop, fc);
    auto [al_sop, al_weather] = align(series, weather);
    const auto ds = make_windows(al_sop, &al_weather, fc.window, fc.horizon, stride);
    if (ds.size() < 2)
        throw std::runtime_error("not enough history to train the " + fc.scale + " model");
    Wiring wiring;
    if (fc.exogenous.empty()) {
        wiring.levels = fc.levels;
        wiring.inputs.assign(static_cast<std::size_t>(fc.levels) + 1, {});
    } else {
        wiring = select_exogenous_bands(band_correlations(ds, fc.exogenous, fc),
                                        rc.bench.wiring_policy);
    }
    TrainConfig tcfg = rc.bench.train;
    tcfg.seed = rc.seed;
    return train_forecaster(ds, fc, wiring, tcfg);
}

int cmd_train(const RunConfig& rc, const std::string& scale) {
    const auto dir = ensure_out_dir(rc.out_path);
    const auto sop = read_sop_csv(rc.sop_path);
    const auto weather = read_weather_csv(rc.weather_path);
    if (scale == "short" || scale == "both") {
        const auto bundle = train_scale(rc, sop, weather, rc.bench.short_config,
                                        rc.bench.short_train_stride);
        const auto path = out_file(dir, "bundle_short.json").string();
        write_text(path, save_bundle(bundle).dump(2) + "\n");
        std::cout << "wrote " << path << "\n";
    }
    if (scale == "long" || scale == "both") {
        const auto bundle =
            train_scale(rc, sop, weather, rc.bench.long_config, rc.bench.long_train_stride);
        const auto path = out_file(dir, "bundle_long.json").string();
        write_text(path, save_bundle(bundle).dump(2) + "\n");
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}

std::string forecast_csv(const UniformSeries& s) {
    std::string out = "timestamp,sop_rad_per_s\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out += format_number(s.time_at(i)) + "," + format_number(s.values[i]) + "\n";
    return out;
}

int cmd_forecast_single(const RunConfig& rc, const std::string& bundle_path,
                        const std::string& out_csv) {
    const auto bundle = load_bundle(read_json(bundle_path));
    const auto& fc = bundle.config;
    const auto sop = read_sop_csv(rc.sop_path);
    const auto series = series_at_scale(sop, fc);
    const auto W = static_cast<std::size_t>(fc.window);
    if (series.size() < W) throw std::runtime_error("history is shorter than one input window");
    const std::span<const double> window(series.values.data() + (series.size() - W), W);

    std::map<std::string, std::vector<double>> exo;
    if (!fc.exogenous.empty()) {
        if (rc.weather_path.empty())
            throw std::runtime_error("this bundle uses weather channels; provide --weather");
        const auto weather = resample_weather(read_weather_csv(rc.weather_path), fc.step);
        const double window_start = series.time_at(series.size() - W);
        for (const auto& ch : fc.exogenous) {
            auto values = channel_from(weather, ch, window_start);
            if (values.size() < W)
                throw std::runtime_error("weather history ends before the input window does");
            values.resize(W);
            exo[ch] = std::move(values);
        }
    }

    const auto predicted = predict(bundle, window, exo);
    UniformSeries out;
    out.start_time = series.end_time() + fc.step;
    out.step = fc.step;
    out.unit = sop.unit;
    out.values = predicted;
    write_text(out_csv, forecast_csv(out));
    std::cout << "wrote " << out_csv << " (" << out.size() << " rows)\n";
    return 0;
}

int cmd_forecast_adaptive(const RunConfig& rc, const std::string& short_bundle_path,
                          const std::string& long_bundle_path, const std::string& out_csv) {
    const auto short_bundle = load_bundle(read_json(short_bundle_path));
    const auto long_bundle = load_bundle(read_json(long_bundle_path));
    const auto& scfg = short_bundle.config;
    const auto& lcfg = long_bundle.config;
    const auto sop = read_sop_csv(rc.sop_path);
    const auto weather = read_weather_csv(rc.weather_path);
    if (std::abs(sop.step - scfg.step) > kGridTol * scfg.step)
        throw std::runtime_error("adaptive mode expects data at the short bundle's step");

    const double ratio = lcfg.step / scfg.step;
    const auto factor = static_cast<long long>(std::llround(ratio));
    if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > kGridTol)
        throw std::runtime_error("long step must be an integer multiple of the short step");
    if (sop.size() % static_cast<std::size_t>(factor) != 0)
        throw std::runtime_error("adaptive mode needs a history length that is a multiple of " +
                                 format_number(lcfg.step) + " s so both scales forecast from the "
                                 "same instant");

    const auto denoised = ema_denoise(sop, scfg.ema_alpha);
    const auto horizon_steps =
        static_cast<std::size_t>(std::llround(lcfg.horizon * lcfg.step / scfg.step));

    const auto fine_weather = resample_weather(weather, scfg.step);
    std::map<std::string, std::vector<double>> exo;
    for (const auto& ch : scfg.exogenous) {
        auto values = channel_from(fine_weather, ch, denoised.start_time);
        if (values.size() < denoised.size() + horizon_steps)
            throw std::runtime_error("weather must cover the 12 h horizon for channel '" + ch +
                                     "' in adaptive mode");
        exo[ch] = std::move(values);
    }
    auto short_values = predict_multi(short_bundle, denoised.values, exo, horizon_steps);
    UniformSeries short_track;
    short_track.start_time = denoised.end_time() + scfg.step;
    short_track.step = scfg.step;
    short_track.unit = sop.unit;
    short_track.values = std::move(short_values);
    const auto short_minutes = aggregate_to_minutes(short_track);

    const auto long_sop = block_average(denoised, static_cast<int>(factor));
    const auto Wl = static_cast<std::size_t>(lcfg.window);
    if (long_sop.size() < Wl)
        throw std::runtime_error("history is shorter than one long-term input window");
    const std::span<const double> long_window(long_sop.values.data() + (long_sop.size() - Wl), Wl);
    const auto coarse_weather = resample_weather(weather, lcfg.step);
    std::map<std::string, std::vector<double>> exo_long;
    const double long_window_start = long_sop.time_at(long_sop.size() - Wl);
    for (const auto& ch : lcfg.exogenous) {
        auto values = channel_from(coarse_weather, ch, long_window_start);
        if (values.size() < Wl)
            throw std::runtime_error("weather history ends before the long input window does");
        values.resize(Wl);
        exo_long[ch] = std::move(values);
    }
    UniformSeries long_track;
    long_track.start_time = long_sop.end_time() + lcfg.step;
    long_track.step = lcfg.step;
    long_track.unit = sop.unit;
    long_track.values = predict(long_bundle, long_window, exo_long);

    double threshold = rc.fusion_threshold;
    if (threshold <= 0.0) {
        auto history_gusts = channel_from(weather, "wind_gust", weather.start_time);
        std::size_t rows = 0;
        while (rows < history_gusts.size() &&
               weather.time_at(rows) <= denoised.end_time() + kGridTol)
            ++rows;
        history_gusts.resize(rows);
        threshold = gust_threshold_percentile(history_gusts, rc.fusion_threshold_percentile);
    }

    const auto baseline = resample_linear(long_track, 60.0);
    const auto minute_gusts = resample_weather(weather, 60.0);
    FusionGate gate;
    gate.threshold = threshold;
    gate.windy.reserve(baseline.size());
    for (std::size_t m = 0; m < baseline.size(); ++m) {
        const auto window = channel_from(minute_gusts, "wind_gust", baseline.time_at(m));
        const double gust = window.front();
        gate.windy.push_back(wind_gate(std::span<const double>(&gust, 1), threshold));
    }

    const auto fused = fuse(long_track, short_minutes, gate);
    std::string csv = "timestamp,sop_rad_per_s,provenance\n";
    for (std::size_t i = 0; i < fused.series.size(); ++i)
        csv += format_number(fused.series.time_at(i)) + "," +
               format_number(fused.series.values[i]) + "," + to_string(fused.provenance[i]) + "\n";
    write_text(out_csv, csv);
    std::size_t windy_minutes = 0;
    for (const auto p : fused.provenance)
        if (p == Provenance::kShortTerm) ++windy_minutes;
    std::cout << "wrote " << out_csv << " (" << fused.series.size() << " minutes, "
              << windy_minutes << " short-term, threshold " << format_number(threshold) << ")\n";
    return 0;
}

int cmd_eval(const RunConfig& rc) {
    const auto dir = ensure_out_dir(rc.out_path);
    UniformSeries sop;
    WeatherTable weather;
    if (rc.sop_path.empty()) {
        auto data = generate(rc.synth, rc.seed);
        sop = std::move(data.first);
        weather = std::move(data.second);
    } else {
        if (rc.weather_path.empty())
            throw std::runtime_error("eval needs --weather when --sop is given");
        sop = read_sop_csv(rc.sop_path);
        weather = read_weather_csv(rc.weather_path);
    }
    const auto result = run_benchmark(sop, weather, rc.bench, rc.seed);
    write_text(out_file(dir, "report_short.json").string(),
               result.short_report.to_json().dump(2) + "\n");
    write_text(out_file(dir, "report_short.txt").string(), result.short_report.to_text());
    write_text(out_file(dir, "plot_short.csv").string(), plot_csv(result.short_plot));
    write_text(out_file(dir, "report_long.json").string(),
               result.long_report.to_json().dump(2) + "\n");
    write_text(out_file(dir, "report_long.txt").string(), result.long_report.to_text());
    write_text(out_file(dir, "plot_long.csv").string(), plot_csv(result.long_plot));
    std::cout << result.short_report.to_text() << "\n" << result.long_report.to_text();
    std::cout << "reports written to " << dir << "\n";
    return 0;
}

int cmd_decompose(const RunConfig& rc, int levels, long long last, const std::string& out_path) {
    const auto sop = read_sop_csv(rc.sop_path);
    std::vector<double> values = sop.values;
    if (last > 0 && static_cast<std::size_t>(last) < values.size())
        values.assign(values.end() - static_cast<std::ptrdiff_t>(last), values.end());
    const auto pyramid = wavedec(values, levels, db5_filters());
    const auto names = band_names(levels);
    nlohmann::json bands;
    bands[names[0]] = pyramid.approx;
    for (int level = levels; level >= 1; --level)
        bands[names[static_cast<std::size_t>(levels - level + 1)]] =
            pyramid.details[static_cast<std::size_t>(level - 1)];
    const nlohmann::json doc{{"levels", levels},
                             {"original_length", values.size()},
                             {"bands", bands}};
    const auto text = doc.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else {
        write_text(out_path, text);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_correlate(const RunConfig& rc, const std::string& scale,
                  const std::vector<std::string>& channels, const std::string& out_path) {
    const auto& fc = scale == "long" ? rc.bench.long_config : rc.bench.short_config;
    const int stride =
        scale == "long" ? rc.bench.long_train_stride : rc.bench.short_train_stride;
    const auto sop = read_sop_csv(rc.sop_path);
    const auto weather = read_weather_csv(rc.weather_path);
    const auto series = series_at_scale(sop, fc);
    auto [al_sop, al_weather] = align(series, weather);
    const auto ds = make_windows(al_sop, &al_weather, fc.window, fc.horizon, stride);
    if (ds.empty()) throw std::runtime_error("not enough history for one window");
    const auto wanted = channels.empty() ? WeatherTable::required_channels() : channels;
    const auto corr = band_correlations(ds, wanted, fc);
    const auto names = band_names(fc.levels);
    std::string csv = "channel,band,r\n";
    for (std::size_t c = 0; c < corr.channels.size(); ++c)
        for (std::size_t b = 0; b < names.size(); ++b)
            csv += corr.channels[c] + "," + names[b] + "," + format_number(corr.r[c][b]) + "\n";
    if (out_path.empty())
        std::cout << csv;
    else {
        write_text(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SOP change forecasting toolkit: multiresolution models for aerial fiber "
                 "polarization monitoring"};
    app.require_subcommand(1);

    std::string config_path, sop_path, weather_path, out_path;
    std::uint64_t seed = 0;

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic SOP/weather dataset");
    double synth_duration = 0.0;
    auto* sy_config = synth_cmd->add_option("--config", config_path, "Key=value config file");
    auto* sy_out = synth_cmd->add_option("--out", out_path, "Output directory");
    auto* sy_seed = synth_cmd->add_option("--seed", seed, "Generator seed");
    auto* sy_dur = synth_cmd->add_option("--duration", synth_duration, "Dataset length, seconds");

    auto* train_cmd = app.add_subcommand("train", "Train forecaster bundles from CSV data");
    std::string train_scale = "both";
    std::string wiring_name;
    int max_epochs = 0;
    auto* tr_config = train_cmd->add_option("--config", config_path, "Key=value config file");
    auto* tr_sop = train_cmd->add_option("--sop", sop_path, "SOP change CSV");
    auto* tr_weather = train_cmd->add_option("--weather", weather_path, "Weather CSV");
    auto* tr_out = train_cmd->add_option("--out", out_path, "Output directory");
    auto* tr_seed = train_cmd->add_option("--seed", seed, "Training seed");
    train_cmd->add_option("--scale", train_scale, "Which scale to train")
        ->check(CLI::IsMember({"short", "long", "both"}));
    auto* tr_wiring = train_cmd->add_option("--wiring", wiring_name, "Exogenous wiring policy")
                          ->check(CLI::IsMember({"top1", "approx"}));
    auto* tr_epochs = train_cmd->add_option("--max-epochs", max_epochs, "Training epoch cap");

    auto* forecast_cmd = app.add_subcommand("forecast", "Forecast the next horizon");
    std::string mode = "single", bundle_path, short_bundle_path, long_bundle_path;
    std::string forecast_out = "forecast.csv";
    double threshold = 0.0;
    auto* fc_config = forecast_cmd->add_option("--config", config_path, "Key=value config file");
    auto* fc_sop = forecast_cmd->add_option("--sop", sop_path, "SOP change CSV");
    auto* fc_weather = forecast_cmd->add_option("--weather", weather_path, "Weather CSV");
    forecast_cmd->add_option("--mode", mode, "single: one bundle; adaptive: fused scales")
        ->check(CLI::IsMember({"single", "adaptive"}));
    forecast_cmd->add_option("--bundle", bundle_path, "Bundle JSON (single mode)");
    forecast_cmd->add_option("--short-bundle", short_bundle_path, "Short bundle (adaptive)");
    forecast_cmd->add_option("--long-bundle", long_bundle_path, "Long bundle (adaptive)");
    forecast_cmd->add_option("--out", forecast_out, "Output CSV path");
    auto* fc_threshold =
        forecast_cmd->add_option("--threshold", threshold, "Windy gust threshold (adaptive)");

    auto* eval_cmd = app.add_subcommand("eval", "Run the train/test benchmark on both scales");
    double test_fraction = 0.0;
    auto* ev_config = eval_cmd->add_option("--config", config_path, "Key=value config file");
    auto* ev_sop = eval_cmd->add_option("--sop", sop_path, "SOP change CSV (default: synthetic)");
    auto* ev_weather = eval_cmd->add_option("--weather", weather_path, "Weather CSV");
    auto* ev_out = eval_cmd->add_option("--out", out_path, "Output directory");
    auto* ev_seed = eval_cmd->add_option("--seed", seed, "Benchmark seed");
    auto* ev_fraction =
        eval_cmd->add_option("--test-fraction", test_fraction, "Chronological test share");
    auto* ev_wiring = eval_cmd->add_option("--wiring", wiring_name, "Exogenous wiring policy")
                          ->check(CLI::IsMember({"top1", "approx"}));
    auto* ev_epochs = eval_cmd->add_option("--max-epochs", max_epochs, "Training epoch cap");

    auto* decompose_cmd = app.add_subcommand("decompose", "Dump the wavelet pyramid of a series");
    int levels = 5;
    long long last = 0;
    std::string decompose_out;
    auto* dc_config = decompose_cmd->add_option("--config", config_path, "Key=value config file");
    auto* dc_sop = decompose_cmd->add_option("--sop", sop_path, "SOP change CSV")->required();
    decompose_cmd->add_option("--levels", levels, "Decomposition depth");
    decompose_cmd->add_option("--last", last, "Use only the trailing N samples");
    decompose_cmd->add_option("--out", decompose_out, "Output JSON path (default: stdout)");

    auto* correlate_cmd =
        app.add_subcommand("correlate", "Correlate SOP and weather wavelet bands");
    std::string correlate_scale = "short", correlate_out;
    std::vector<std::string> correlate_channels;
    auto* cr_config = correlate_cmd->add_option("--config", config_path, "Key=value config file");
    auto* cr_sop = correlate_cmd->add_option("--sop", sop_path, "SOP change CSV");
    auto* cr_weather = correlate_cmd->add_option("--weather", weather_path, "Weather CSV");
    correlate_cmd->add_option("--scale", correlate_scale, "Window geometry to use")
        ->check(CLI::IsMember({"short", "long"}));
    correlate_cmd->add_option("--channels", correlate_channels, "Channels to correlate")
        ->delimiter(',');
    correlate_cmd->add_option("--out", correlate_out, "Output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunConfig rc = load_run_config(config_path);
        const auto apply_common = [&](CLI::Option* sop_opt, CLI::Option* weather_opt,
                                      CLI::Option* out_opt, CLI::Option* seed_opt) {
            if (sop_opt && sop_opt->count()) rc.sop_path = sop_path;
            if (weather_opt && weather_opt->count()) rc.weather_path = weather_path;
            if (out_opt && out_opt->count()) rc.out_path = out_path;
            if (seed_opt && seed_opt->count()) rc.seed = seed;
        };
        (void)sy_config;
        (void)tr_config;
        (void)fc_config;
        (void)ev_config;
        (void)dc_config;
        (void)cr_config;

        if (*synth_cmd) {
            apply_common(nullptr, nullptr, sy_out, sy_seed);
            if (sy_dur->count()) rc.synth.duration_seconds = synth_duration;
            return cmd_synth(rc);
        }
        if (*train_cmd) {
            apply_common(tr_sop, tr_weather, tr_out, tr_seed);
            if (tr_wiring->count()) rc.bench.wiring_policy = wiring_policy_from_string(wiring_name);
            if (tr_epochs->count()) rc.bench.train.max_epochs = max_epochs;
            if (rc.sop_path.empty() || rc.weather_path.empty())
                throw std::runtime_error("train needs --sop and --weather");
            return cmd_train(rc, train_scale);
        }
        if (*forecast_cmd) {
            apply_common(fc_sop, fc_weather, nullptr, nullptr);
            if (fc_threshold->count()) rc.fusion_threshold = threshold;
            if (rc.sop_path.empty()) throw std::runtime_error("forecast needs --sop");
            if (mode == "adaptive") {
                if (short_bundle_path.empty() || long_bundle_path.empty())
                    throw std::runtime_error(
                        "adaptive mode needs --short-bundle and --long-bundle");
                if (rc.weather_path.empty())
                    throw std::runtime_error("adaptive mode needs --weather");
                return cmd_forecast_adaptive(rc, short_bundle_path, long_bundle_path,
                                             forecast_out);
            }
            if (bundle_path.empty()) throw std::runtime_error("single mode needs --bundle");
            return cmd_forecast_single(rc, bundle_path, forecast_out);
        }
        if (*eval_cmd) {
            apply_common(ev_sop, ev_weather, ev_out, ev_seed);
            if (ev_fraction->count()) rc.bench.test_fraction = test_fraction;
            if (ev_wiring->count()) rc.bench.wiring_policy = wiring_policy_from_string(wiring_name);
            if (ev_epochs->count()) rc.bench.train.max_epochs = max_epochs;
            return cmd_eval(rc);
        }
        if (*decompose_cmd) {
            apply_common(dc_sop, nullptr, nullptr, nullptr);
            return cmd_decompose(rc, levels, last, decompose_out);
        }
        if (*correlate_cmd) {
            apply_common(cr_sop, cr_weather, nullptr, nullptr);
            if (rc.sop_path.empty() || rc.weather_path.empty())
                throw std::runtime_error("correlate needs --sop and --weather");
            return cmd_correlate(rc, correlate_scale, correlate_channels, correlate_out);
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
