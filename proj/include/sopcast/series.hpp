#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sopcast {

/// Uniformly sampled scalar series. Timestamps are UTC epoch seconds and
/// are implied: sample i lives at start_time + i * step.
struct UniformSeries {
    double start_time = 0.0; ///< epoch seconds, UTC
    double step = 1.0;       ///< seconds, > 0
    std::vector<double> values;
    std::string unit;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double time_at(std::size_t i) const { return start_time + static_cast<double>(i) * step; }
    double end_time() const { return time_at(values.empty() ? 0 : values.size() - 1); }
};

/// Time-aligned multichannel weather table on a uniform grid. Column order
/// is preserved from ingestion; wind_gust/temperature/humidity are required,
/// extra channels ride along unused.
struct WeatherTable {
    double start_time = 0.0;
    double step = 1.0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    static const std::vector<std::string>& required_channels();

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    bool has_channel(const std::string& name) const;
    const std::vector<double>& channel(const std::string& name) const;
    double time_at(std::size_t i) const { return start_time + static_cast<double>(i) * step; }
    double end_time() const { return time_at(rows() == 0 ? 0 : rows() - 1); }

    /// Throws unless required channels are present and all columns share one length.
    void validate() const;
};

/// Sliding windows for supervised forecasting. For each sample, inputs holds
/// the W history values, targets the same span shifted forward by the horizon
/// (so its last H values are the future), and exogenous the co-located window
/// of every weather channel.
struct WindowedDataset {
    int window = 0;  ///< W
    int horizon = 0; ///< H
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
    std::map<std::string, std::vector<std::vector<double>>> exogenous;
    std::vector<double> anchors; ///< forecast origin (timestamp of last input sample)

    bool empty() const { return inputs.empty(); }
    std::size_t size() const { return inputs.size(); }
};

struct ZScoreStats {
    double mean = 0.0;
    double std = 0.0; ///< population
};

/// Exponential-moving-average denoiser: y0 = x0, yt = a*xt + (1-a)*y(t-1).
UniformSeries ema_denoise(const UniformSeries& s, double alpha);

/// Linear resampling onto a new step. Output covers [start, last original
/// timestamp]; values at original grid points are reproduced exactly.
UniformSeries resample_linear(const UniformSeries& s, double target_step);

/// Restrict both inputs to their common time range. Weather is resampled to
/// the series step first when the steps differ. Throws when the grids share
/// no timestamps.
std::pair<UniformSeries, WeatherTable> align(const UniformSeries& sop, const WeatherTable& weather);

/// Build the sliding-window dataset. When the series is shorter than W + H
/// the result is empty (callers report "insufficient history"); that is not
/// an error. exo may be null.
WindowedDataset make_windows(const UniformSeries& sop, const WeatherTable* exo,
                             int window, int horizon, int stride);

ZScoreStats zscore_stats(std::span<const double> values);
/// Applies (x - mean) / std; a std below 1e-12 is treated as 1 so constant
/// bands map to zeros instead of blowing up.
std::vector<double> zscore_apply(std::span<const double> values, const ZScoreStats& stats);
std::vector<double> zscore_invert(std::span<const double> values, const ZScoreStats& stats);

/// Every factor-th sample, starting at index 0; step scales by factor.
UniformSeries subsample(const UniformSeries& s, int factor);

/// Mean of each consecutive factor-sample block; a trailing partial block
/// averages the samples it has. step scales by factor.
UniformSeries block_average(const UniformSeries& s, int factor);

} // namespace sopcast
