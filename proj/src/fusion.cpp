#include "sopcast/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sopcast/stats.hpp"

namespace sopcast {

namespace {
constexpr double kMinuteStep = 60.0;
constexpr double kGridTol = 1e-6;
} // namespace

std::string to_string(Provenance p) {
    return p == Provenance::kShortTerm ? "short-term" : "long-term";
}

bool wind_gate(std::span<const double> gust_window, double threshold) {
    if (gust_window.empty()) throw std::invalid_argument("wind_gate: empty gust window");
    return *std::max_element(gust_window.begin(), gust_window.end()) >= threshold;
}

UniformSeries aggregate_to_minutes(const UniformSeries& second_scale) {
    if (second_scale.empty()) throw std::invalid_argument("aggregate_to_minutes: empty series");
    if (std::abs(second_scale.step - 1.0) > kGridTol)
        throw std::invalid_argument("aggregate_to_minutes: input step must be 1 s");
    UniformSeries out;
    out.start_time = second_scale.start_time;
    out.step = kMinuteStep;
    out.unit = second_scale.unit;
    const std::size_t n = second_scale.size();
    for (std::size_t block = 0; block < n; block += 60) {
        const std::size_t stop = std::min(block + 60, n);
        double sum = 0.0;
        for (std::size_t i = block; i < stop; ++i) sum += second_scale.values[i];
        out.values.push_back(sum / static_cast<double>(stop - block));
    }
    return out;
}

FusedForecast fuse(const UniformSeries& long_forecast, const UniformSeries& short_minutes,
                   const FusionGate& gate) {
    const UniformSeries baseline = resample_linear(long_forecast, kMinuteStep);
    if (gate.windy.size() != baseline.size())
        throw std::invalid_argument("fuse: gate has " + std::to_string(gate.windy.size()) +
                                    " decisions for " + std::to_string(baseline.size()) +
                                    " fused minutes");
    if (!short_minutes.empty() && std::abs(short_minutes.step - kMinuteStep) > kGridTol)
        throw std::invalid_argument("fuse: short-term series must be minute-resolution");

    FusedForecast out;
    out.series.start_time = baseline.start_time;
    out.series.step = kMinuteStep;
    out.series.unit = long_forecast.unit;
    out.series.values.resize(baseline.size());
    out.provenance.resize(baseline.size());
    for (std::size_t m = 0; m < baseline.size(); ++m) {
        if (!gate.windy[m]) {
            out.series.values[m] = baseline.values[m];
            out.provenance[m] = Provenance::kLongTerm;
            continue;
        }
        const double t = baseline.time_at(m);
        const double pos = (t - short_minutes.start_time) / kMinuteStep;
        const auto idx = static_cast<long long>(std::llround(pos));
        if (short_minutes.empty() || std::abs(pos - static_cast<double>(idx)) > kGridTol ||
            idx < 0 || idx >= static_cast<long long>(short_minutes.size()))
            throw std::runtime_error("fuse: windy minute at t=" + std::to_string(t) +
                                     " has no short-term value");
        out.series.values[m] = short_minutes.values[static_cast<std::size_t>(idx)];
        out.provenance[m] = Provenance::kShortTerm;
    }
    return out;
}

double gust_threshold_percentile(std::span<const double> gusts, double pct) {
    return percentile(std::vector<double>(gusts.begin(), gusts.end()), pct);
}

} // namespace sopcast
