#include "sopcast/harness.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "sopcast/csv.hpp"

namespace sopcast {

double rmse(std::span<const double> truth, std::span<const double> pred) {
    if (truth.empty() || truth.size() != pred.size())
        throw std::invalid_argument("rmse: inputs must be non-empty and equal-length");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - pred[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(truth.size()));
}

double mape(std::span<const double> truth, std::span<const double> pred) {
    if (truth.empty() || truth.size() != pred.size())
        throw std::invalid_argument("mape: inputs must be non-empty and equal-length");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (std::abs(truth[i]) < 1e-9)
            throw std::runtime_error("mape: truth value at index " + std::to_string(i) +
                                     " is within 1e-9 of zero, MAPE is undefined");
        acc += std::abs(truth[i] - pred[i]) / std::abs(truth[i]);
    }
    return 100.0 * acc / static_cast<double>(truth.size());
}

const MethodRow& EvalReport::row(const std::string& method) const {
    for (const auto& r : rows)
        if (r.method == method) return r;
    throw std::invalid_argument("EvalReport: no row for method '" + method + "'");
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"method", r.method}, {"rmse", r.rmse}, {"mape", r.mape}});
    return nlohmann::json{{"scale", scale},
                          {"rows", rows_json},
                          {"improvements", improvements},
                          {"seed", seed},
                          {"data_descriptor", data_descriptor}};
}

std::string EvalReport::to_text() const {
    std::string out = scale + "-term benchmark, seed " + std::to_string(seed) + "\n";
    out += "data: " + data_descriptor + "\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-16s %14s %12s\n", "method", "RMSE (rad/s)", "MAPE (%)");
    out += line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-16s %14.5f %12.5f\n", r.method.c_str(), r.rmse,
                      r.mape);
        out += line;
    }
    for (const auto& [key, value] : improvements) {
        std::snprintf(line, sizeof line, "%s: %.2f%%\n", key.c_str(), value);
        out += line;
    }
    return out;
}

std::string plot_csv(const std::vector<PlotPoint>& points) {
    std::string out = "timestamp,truth,prediction,method\n";
    for (const auto& p : points)
        out += format_number(p.timestamp) + "," + format_number(p.truth) + "," +
               format_number(p.prediction) + "," + p.method + "\n";
    return out;
}

TrainConfig benchmark_train_config() {
    TrainConfig t;
    t.max_epochs = 300;
    t.patience = 40;
    t.hidden_units = 16;
    return t;
}

void BenchmarkConfig::validate() const {
    short_config.validate();
    long_config.validate();
    if (short_config.scale != "short" || long_config.scale != "long")
        throw std::invalid_argument("BenchmarkConfig: scale tags must be short and long");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("BenchmarkConfig: test fraction must be in (0, 1)");
    if (short_train_stride < 1 || long_train_stride < 1)
        throw std::invalid_argument("BenchmarkConfig: train strides must be >= 1");
    if (short_eval_stride < 0 || long_eval_stride < 0)
        throw std::invalid_argument("BenchmarkConfig: eval strides must be >= 0");
}

namespace {

UniformSeries slice_series(const UniformSeries& s, std::size_t begin, std::size_t end) {
    UniformSeries out;
    out.start_time = s.time_at(begin);
    out.step = s.step;
    out.unit = s.unit;
    out.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(begin),
                      s.values.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

WeatherTable slice_weather(const WeatherTable& w, std::size_t begin, std::size_t end) {
    WeatherTable out;
    out.start_time = w.time_at(begin);
    out.step = w.step;
    out.names = w.names;
    out.columns.reserve(w.columns.size());
    for (const auto& col : w.columns)
        out.columns.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(begin),
                                 col.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

std::string describe(const UniformSeries& s, std::size_t test_len) {
    return "n=" + std::to_string(s.size()) + " step=" + format_number(s.step) + "s start=" +
           format_number(s.start_time) + " test=" + std::to_string(test_len);
}

struct ScaleArtifacts {
    EvalReport report;
    std::vector<PlotPoint> plot;
};

ScaleArtifacts run_scale(const UniformSeries& series, const WeatherTable& weather,
                         const ForecastConfig& fc, const TrainConfig& tcfg, WiringPolicy policy,
                         double test_fraction, int train_stride, int eval_stride,
                         const std::string& full_name, const std::string& uni_name,
                         const std::string& improvement_key) {
    const auto W = static_cast<std::size_t>(fc.window);
    const auto H = static_cast<std::size_t>(fc.horizon);
    const std::size_t n = series.size();
    const auto test_len =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (test_len < H || n < test_len + W + H)
        throw std::invalid_argument("run_benchmark: insufficient data for the " + fc.scale +
                                    " scale");
    const std::size_t split = n - test_len;

    const auto train_sop = slice_series(series, 0, split);
    const auto train_weather = slice_weather(weather, 0, split);
    const auto train_ds =
        make_windows(train_sop, &train_weather, fc.window, fc.horizon, train_stride);
    if (train_ds.size() < 2)
        throw std::invalid_argument("run_benchmark: too few training windows on the " + fc.scale +
                                    " scale");

    ForecastConfig uni_cfg = fc;
    uni_cfg.exogenous.clear();
    Wiring uni_wiring;
    uni_wiring.levels = fc.levels;
    uni_wiring.inputs.assign(static_cast<std::size_t>(fc.levels) + 1, {});

    const auto full_wiring =
        select_exogenous_bands(band_correlations(train_ds, fc.exogenous, fc), policy);
    const auto full_bundle = train_forecaster(train_ds, fc, full_wiring, tcfg);
    const auto uni_bundle = train_forecaster(train_ds, uni_cfg, uni_wiring, tcfg);
    const auto ann = train_plain_ann(train_ds, fc, tcfg);

    const auto eval_sop = slice_series(series, split - W, n);
    const auto eval_weather = slice_weather(weather, split - W, n);
    const auto eval_ds = make_windows(eval_sop, &eval_weather, fc.window, fc.horizon, eval_stride);
    if (eval_ds.empty())
        throw std::invalid_argument("run_benchmark: no evaluation windows on the " + fc.scale +
                                    " scale");

    std::vector<double> truth_pool;
    std::vector<double> full_pool, uni_pool, ann_pool, ma_pool;
    std::vector<PlotPoint> plot;
    for (std::size_t k = 0; k < eval_ds.size(); ++k) {
        const std::span<const double> input(eval_ds.inputs[k]);
        std::map<std::string, std::vector<double>> exo_map;
        for (const auto& [name, windows] : eval_ds.exogenous) exo_map[name] = windows[k];
        const std::vector<double> truth(eval_ds.targets[k].end() - static_cast<std::ptrdiff_t>(H),
                                        eval_ds.targets[k].end());

        const auto p_full = predict(full_bundle, input, exo_map);
        const auto p_uni = predict(uni_bundle, input, exo_map);
        const auto p_ann = plain_ann_predict(ann, input);
        const auto p_ma = moving_average_forecast(input, W, H);

        truth_pool.insert(truth_pool.end(), truth.begin(), truth.end());
        full_pool.insert(full_pool.end(), p_full.begin(), p_full.end());
        uni_pool.insert(uni_pool.end(), p_uni.begin(), p_uni.end());
        ann_pool.insert(ann_pool.end(), p_ann.begin(), p_ann.end());
        ma_pool.insert(ma_pool.end(), p_ma.begin(), p_ma.end());

        if ((k * static_cast<std::size_t>(eval_stride)) % H == 0) {
            for (std::size_t j = 0; j < H; ++j) {
                const double ts = eval_ds.anchors[k] + static_cast<double>(j + 1) * series.step;
                plot.push_back({ts, truth[j], p_full[j], full_name});
                plot.push_back({ts, truth[j], p_uni[j], uni_name});
                plot.push_back({ts, truth[j], p_ann[j], "ann"});
                plot.push_back({ts, truth[j], p_ma[j], "moving_average"});
            }
        }
    }

    ScaleArtifacts out;
    out.report.scale = fc.scale;
    out.report.data_descriptor = describe(series, test_len);
    out.report.rows = {{full_name, rmse(truth_pool, full_pool), mape(truth_pool, full_pool)},
                       {uni_name, rmse(truth_pool, uni_pool), mape(truth_pool, uni_pool)},
                       {"ann", rmse(truth_pool, ann_pool), mape(truth_pool, ann_pool)},
                       {"moving_average", rmse(truth_pool, ma_pool), mape(truth_pool, ma_pool)}};
    const auto& full_row = out.report.rows[0];
    const auto& uni_row = out.report.rows[1];
    out.report.improvements[improvement_key + "_rmse"] =
        uni_row.rmse > 0.0 ? (uni_row.rmse - full_row.rmse) / uni_row.rmse * 100.0 : 0.0;
    out.report.improvements[improvement_key + "_mape"] =
        uni_row.mape > 0.0 ? (uni_row.mape - full_row.mape) / uni_row.mape * 100.0 : 0.0;
    out.plot = std::move(plot);
    return out;
}

} // namespace

BenchmarkResult run_benchmark(const UniformSeries& sop, const WeatherTable& weather,
                              const BenchmarkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    auto [aligned_sop, aligned_weather] = align(sop, weather);
    const auto denoised = ema_denoise(aligned_sop, cfg.short_config.ema_alpha);
    if (std::abs(denoised.step - cfg.short_config.step) > 1e-6 * cfg.short_config.step)
        throw std::invalid_argument("run_benchmark: series step does not match the short config");

    const TrainConfig& tcfg = cfg.train;

    BenchmarkResult result;
    {
        const int stride =
            cfg.short_eval_stride == 0 ? cfg.short_config.horizon : cfg.short_eval_stride;
        auto art = run_scale(denoised, aligned_weather, cfg.short_config, tcfg, cfg.wiring_policy,
                             cfg.test_fraction, cfg.short_train_stride, stride, "windy", "calm",
                             "windy_over_calm");
        art.report.seed = seed;
        result.short_report = std::move(art.report);
        result.short_plot = std::move(art.plot);
    }
    {
        const double ratio = cfg.long_config.step / denoised.step;
        const auto factor = static_cast<int>(std::llround(ratio));
        if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-6)
            throw std::invalid_argument(
                "run_benchmark: long step must be an integer multiple of the series step");
        const auto long_sop = block_average(denoised, factor);
        auto [al_sop, al_weather] = align(long_sop, weather);
        const int stride =
            cfg.long_eval_stride == 0 ? cfg.long_config.horizon : cfg.long_eval_stride;
        auto art = run_scale(al_sop, al_weather, cfg.long_config, tcfg, cfg.wiring_policy,
                             cfg.test_fraction, cfg.long_train_stride, stride, "long_term",
                             "ann_dwt", "long_term_over_ann_dwt");
        art.report.seed = seed;
        result.long_report = std::move(art.report);
        result.long_plot = std::move(art.plot);
    }
    return result;
}

} // namespace sopcast
