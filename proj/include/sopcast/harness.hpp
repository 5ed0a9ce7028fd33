#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "sopcast/forecast.hpp"
#include "sopcast/neural.hpp"
#include "sopcast/series.hpp"

namespace sopcast {

double rmse(std::span<const double> truth, std::span<const double> pred);

/// Percentage error; throws when any truth value is within 1e-9 of zero.
double mape(std::span<const double> truth, std::span<const double> pred);

struct MethodRow {
    std::string method;
    double rmse = 0.0;
    double mape = 0.0;
};

/// One benchmark table: per-method pooled metrics over the test split.
struct EvalReport {
    std::string scale; ///< "short" or "long"
    std::vector<MethodRow> rows;
    std::map<std::string, double> improvements; ///< percent, (base - ours) / base * 100
    std::uint64_t seed = 0;
    std::string data_descriptor;

    const MethodRow& row(const std::string& method) const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// One forecast sample for truth/prediction overlay plots.
struct PlotPoint {
    double timestamp = 0.0;
    double truth = 0.0;
    double prediction = 0.0;
    std::string method;
};

std::string plot_csv(const std::vector<PlotPoint>& points);

/// Training settings sized for benchmark runs rather than one-off model fits.
TrainConfig benchmark_train_config();

struct BenchmarkConfig {
    ForecastConfig short_config = ForecastConfig::short_term();
    ForecastConfig long_config = ForecastConfig::long_term();
    TrainConfig train = benchmark_train_config();
    WiringPolicy wiring_policy = WiringPolicy::kApprox;
    double test_fraction = 0.1; ///< chronological tail used for evaluation
    int short_train_stride = 60;
    int long_train_stride = 1;
    int short_eval_stride = 0; ///< 0 means the horizon (non-overlapping tiling)
    int long_eval_stride = 1;

    void validate() const;
};

struct BenchmarkResult {
    EvalReport short_report;
    EvalReport long_report;
    std::vector<PlotPoint> short_plot;
    std::vector<PlotPoint> long_plot;
};

/// Trains and evaluates both scales on a chronological split. Short-scale
/// rows: windy, calm, ann, moving_average. Long-scale rows: long_term,
/// ann_dwt, ann, moving_average. `seed` labels the data realization in the
/// reports; training uses the seed frozen in `cfg.train`.
BenchmarkResult run_benchmark(const UniformSeries& sop, const WeatherTable& weather,
                              const BenchmarkConfig& cfg, std::uint64_t seed);

} // namespace sopcast
