#pragma once

#include <span>
#include <string>
#include <vector>

#include "sopcast/series.hpp"

namespace sopcast {

enum class Provenance { kShortTerm, kLongTerm };

std::string to_string(Provenance p);

/// Per-minute windy/calm schedule for the fused horizon.
struct FusionGate {
    double threshold = 0.0;
    std::vector<bool> windy; ///< one decision per fused minute
};

/// Minute-resolution forecast with the model that produced each value.
struct FusedForecast {
    UniformSeries series;
    std::vector<Provenance> provenance;
};

/// Windy when the window's maximum gust reaches the threshold.
bool wind_gate(std::span<const double> gust_window, double threshold);

/// Mean of each 60-sample block of a 1 s series; a trailing partial block
/// averages the samples it has.
UniformSeries aggregate_to_minutes(const UniformSeries& second_scale);

/// Linearly interpolates the long-term forecast to the minute grid, then
/// replaces gated-windy minutes with the aggregated short-term values.
/// Windy minutes without a matching short-term sample are an error; the
/// gate must carry one decision per fused minute.
FusedForecast fuse(const UniformSeries& long_forecast, const UniformSeries& short_minutes,
                   const FusionGate& gate);

/// Default gate threshold: the pct-th percentile of training gusts.
double gust_threshold_percentile(std::span<const double> gusts, double pct = 75.0);

} // namespace sopcast
