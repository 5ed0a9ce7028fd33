#pragma once

#include <string>

#include "sopcast/series.hpp"

namespace sopcast {

/// Parses an RFC 3339 timestamp ("2021-03-18T06:30:00Z", offsets allowed)
/// to UTC epoch seconds. Throws on malformed input.
double parse_rfc3339(const std::string& text);

/// Epoch seconds rendered as a bare integer when integral, otherwise with
/// shortest round-trip decimal digits.
std::string format_number(double v);

/// Reads `timestamp,sop_rad_per_s`. Timestamps may be RFC 3339 or integer
/// epoch seconds (auto-detected from the first row; mixing is an error) and
/// must form a uniform grid. Non-finite values are rejected.
UniformSeries read_sop_csv(const std::string& path);

/// Reads `timestamp,wind_gust,temperature,humidity[,extra...]`. Missing or
/// NaN readings are repaired by linear interpolation across gaps of at most
/// 4 steps; longer gaps and gaps touching either end are ingestion errors.
WeatherTable read_weather_csv(const std::string& path);

void write_sop_csv(const std::string& path, const UniformSeries& s);
void write_weather_csv(const std::string& path, const WeatherTable& w);

} // namespace sopcast
