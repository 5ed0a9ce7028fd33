#include "sopcast/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sopcast/stats.hpp"

namespace sopcast {

namespace {

constexpr double kGridTol = 1e-6; // fraction of a step

bool near_integer(double x, double tol, long long* out) {
    const double r = std::round(x);
    if (std::abs(x - r) <= tol) {
        *out = static_cast<long long>(r);
        return true;
    }
    return false;
}

} // namespace

const std::vector<std::string>& WeatherTable::required_channels() {
    static const std::vector<std::string> names = {"wind_gust", "temperature", "humidity"};
    return names;
}

bool WeatherTable::has_channel(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& WeatherTable::channel(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return columns[i];
    }
    throw std::invalid_argument("WeatherTable: no channel named '" + name + "'");
}

void WeatherTable::validate() const {
    if (names.size() != columns.size())
        throw std::runtime_error("WeatherTable: name/column count mismatch");
    if (step <= 0.0) throw std::runtime_error("WeatherTable: step must be positive");
    for (const auto& required : required_channels()) {
        if (!has_channel(required))
            throw std::runtime_error("WeatherTable: missing required channel '" + required + "'");
    }
    const std::size_t n = rows();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].size() != n)
            throw std::runtime_error("WeatherTable: channel '" + names[i] +
                                     "' length differs from the shared time grid");
        for (double v : columns[i]) {
            if (!std::isfinite(v))
                throw std::runtime_error("WeatherTable: non-finite value in channel '" + names[i] + "'");
        }
    }
}

// ============================================================================
// Denoising and resampling
// ============================================================================

UniformSeries ema_denoise(const UniformSeries& s, double alpha) {
    if (s.empty()) throw std::invalid_argument("ema_denoise: empty series");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("ema_denoise: alpha must be in (0, 1]");
    UniformSeries out = s;
    double y = s.values.front();
    out.values[0] = y;
    for (std::size_t i = 1; i < s.values.size(); ++i) {
        y = alpha * s.values[i] + (1.0 - alpha) * y;
        out.values[i] = y;
    }
    return out;
}

UniformSeries resample_linear(const UniformSeries& s, double target_step) {
    if (target_step <= 0.0) throw std::invalid_argument("resample_linear: target_step must be positive");
    if (s.size() < 2) throw std::invalid_argument("resample_linear: need at least 2 samples");

    const std::size_t n = s.size();
    const double ratio = target_step / s.step; // source index advance per output sample
    const auto count = static_cast<std::size_t>(
        std::floor(static_cast<double>(n - 1) / ratio + kGridTol)) + 1;

    UniformSeries out;
    out.start_time = s.start_time;
    out.step = target_step;
    out.unit = s.unit;
    out.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double pos = static_cast<double>(i) * ratio;
        // Snap to source samples so original grid points are reproduced exactly.
        const double r = std::round(pos);
        if (std::abs(pos - r) <= kGridTol) {
            out.values[i] = s.values[std::min(static_cast<std::size_t>(r), n - 1)];
            continue;
        }
        auto lo = static_cast<std::size_t>(pos);
        if (lo >= n - 1) lo = n - 2;
        const double frac = pos - static_cast<double>(lo);
        out.values[i] = s.values[lo] + frac * (s.values[lo + 1] - s.values[lo]);
    }
    return out;
}

// ============================================================================
// Alignment and windowing
// ============================================================================

std::pair<UniformSeries, WeatherTable> align(const UniformSeries& sop, const WeatherTable& weather) {
    if (sop.empty()) throw std::invalid_argument("align: empty series");
    weather.validate();
    if (weather.rows() == 0) throw std::invalid_argument("align: empty weather table");

    WeatherTable w = weather;
    if (w.step != sop.step) {
        if (w.rows() < 2)
            throw std::runtime_error("align: cannot resample a single-row weather table");
        WeatherTable resampled;
        resampled.start_time = w.start_time;
        resampled.step = sop.step;
        resampled.names = w.names;
        for (const auto& col : w.columns) {
            UniformSeries ch{w.start_time, w.step, col, ""};
            resampled.columns.push_back(resample_linear(ch, sop.step).values);
        }
        w = std::move(resampled);
    }

    // Both grids now share the step; they intersect only if their offsets
    // differ by a whole number of steps.
    const double step = sop.step;
    long long phase = 0;
    if (!near_integer((w.start_time - sop.start_time) / step, kGridTol, &phase))
        throw std::runtime_error("align: grids share no timestamps (staggered by a fractional step)");

    const double lo = std::max(sop.start_time, w.start_time);
    const double hi = std::min(sop.end_time(), w.end_time());
    if (lo > hi + kGridTol * step) throw std::runtime_error("align: time ranges do not overlap");

    const auto sop_from = static_cast<std::size_t>(std::llround((lo - sop.start_time) / step));
    const auto w_from = static_cast<std::size_t>(std::llround((lo - w.start_time) / step));
    const auto len = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;

    UniformSeries sop_out;
    sop_out.start_time = sop.time_at(sop_from);
    sop_out.step = step;
    sop_out.unit = sop.unit;
    sop_out.values.assign(sop.values.begin() + static_cast<std::ptrdiff_t>(sop_from),
                          sop.values.begin() + static_cast<std::ptrdiff_t>(sop_from + len));

    WeatherTable w_out;
    w_out.start_time = sop_out.start_time;
    w_out.step = step;
    w_out.names = w.names;
    for (const auto& col : w.columns) {
        w_out.columns.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(w_from),
                                   col.begin() + static_cast<std::ptrdiff_t>(w_from + len));
    }
    return {std::move(sop_out), std::move(w_out)};
}

WindowedDataset make_windows(const UniformSeries& sop, const WeatherTable* exo,
                             int window, int horizon, int stride) {
    if (horizon < 1 || window <= horizon)
        throw std::invalid_argument("make_windows: require W > H >= 1");
    if (stride < 1) throw std::invalid_argument("make_windows: stride must be >= 1");
    if (exo) {
        exo->validate();
        if (exo->rows() != sop.size() || exo->start_time != sop.start_time || exo->step != sop.step)
            throw std::invalid_argument("make_windows: exogenous table is not aligned with the series");
    }

    WindowedDataset ds;
    ds.window = window;
    ds.horizon = horizon;
    const auto n = static_cast<long long>(sop.size());
    if (n < window + horizon) return ds; // empty dataset, not an error

    const auto count = static_cast<std::size_t>((n - window - horizon) / stride) + 1;
    ds.inputs.reserve(count);
    ds.targets.reserve(count);
    ds.anchors.reserve(count);
    if (exo) {
        for (const auto& name : exo->names) ds.exogenous[name].reserve(count);
    }
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = k * static_cast<std::size_t>(stride);
        const auto* base = sop.values.data() + i;
        ds.inputs.emplace_back(base, base + window);
        ds.targets.emplace_back(base + horizon, base + horizon + window);
        ds.anchors.push_back(sop.time_at(i + static_cast<std::size_t>(window) - 1));
        if (exo) {
            for (std::size_t c = 0; c < exo->names.size(); ++c) {
                const auto* e = exo->columns[c].data() + i;
                ds.exogenous[exo->names[c]].emplace_back(e, e + window);
            }
        }
    }
    return ds;
}

// ============================================================================
// Normalization
// ============================================================================

ZScoreStats zscore_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("zscore_stats: empty input");
    return {mean_of(values), population_std(values)};
}

std::vector<double> zscore_apply(std::span<const double> values, const ZScoreStats& stats) {
    const double denom = stats.std < 1e-12 ? 1.0 : stats.std;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - stats.mean) / denom;
    return out;
}

std::vector<double> zscore_invert(std::span<const double> values, const ZScoreStats& stats) {
    const double denom = stats.std < 1e-12 ? 1.0 : stats.std;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * denom + stats.mean;
    return out;
}

UniformSeries subsample(const UniformSeries& s, int factor) {
    if (factor < 1) throw std::invalid_argument("subsample: factor must be >= 1");
    if (s.empty()) throw std::invalid_argument("subsample: empty series");
    UniformSeries out;
    out.start_time = s.start_time;
    out.step = s.step * factor;
    out.unit = s.unit;
    for (std::size_t i = 0; i < s.size(); i += static_cast<std::size_t>(factor))
        out.values.push_back(s.values[i]);
    return out;
}

UniformSeries block_average(const UniformSeries& s, int factor) {
    if (factor < 1) throw std::invalid_argument("block_average: factor must be >= 1");
    if (s.empty()) throw std::invalid_argument("block_average: empty series");
    UniformSeries out;
    out.start_time = s.start_time;
    out.step = s.step * factor;
    out.unit = s.unit;
    const auto f = static_cast<std::size_t>(factor);
    for (std::size_t i = 0; i < s.size(); i += f) {
        const std::size_t end = std::min(s.size(), i + f);
        double acc = 0.0;
        for (std::size_t j = i; j < end; ++j) acc += s.values[j];
        out.values.push_back(acc / static_cast<double>(end - i));
    }
    return out;
}

} // namespace sopcast
