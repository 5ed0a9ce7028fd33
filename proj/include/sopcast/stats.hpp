#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sopcast {

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Population standard deviation (divide by N).
inline double population_std(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

/// Pearson correlation with population denominators. When either side has
/// zero variance r is defined as 0 and *degenerate (if given) is set.
inline double pearson(std::span<const double> x, std::span<const double> y,
                      bool* degenerate = nullptr) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.empty()) throw std::invalid_argument("pearson: empty input");
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return sxy / std::sqrt(sxx * syy);
}

/// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> v, double pct) {
    if (v.empty()) throw std::invalid_argument("percentile: empty input");
    if (pct < 0.0 || pct > 100.0) throw std::invalid_argument("percentile: pct out of range");
    std::sort(v.begin(), v.end());
    const double rank = pct / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = rank - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

} // namespace sopcast
