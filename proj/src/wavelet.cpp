#include "sopcast/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sopcast {

namespace {

// Daubechies-5 scaling filter, computed by spectral factorization at 60
// decimal digits and rounded to nearest double. These roundings satisfy
// sum(h) == sqrt(2) and sum(h^2) == 1 exactly in double arithmetic.
constexpr double kDb5[10] = {
    0.16010239797419293,
    0.6038292697971896,
    0.7243085284377729,
    0.13842814590132074,
    -0.24229488706638203,
    -0.032244869584638375,
    0.07757149384004572,
    -0.006241490212798274,
    -0.012580751999081999,
    0.0033357252854737712,
};

// Symmetric half-point extension: the signal is reflected without repeating
// the edge sample's mirror partner offset, giving a period-2n sequence
// x[0..n-1], x[n-1..0].
double ext_at(std::span<const double> x, long long m) {
    const auto n = static_cast<long long>(x.size());
    const long long period = 2 * n;
    m %= period;
    if (m < 0) m += period;
    return x[static_cast<std::size_t>(m < n ? m : period - 1 - m)];
}

} // namespace

const WaveletSpec& db5_filters() {
    static const WaveletSpec spec = [] {
        WaveletSpec s;
        s.name = "db5";
        s.lowpass.assign(kDb5, kDb5 + 10);
        s.highpass.resize(10);
        for (std::size_t k = 0; k < 10; ++k)
            s.highpass[k] = (k % 2 == 0 ? 1.0 : -1.0) * s.lowpass[9 - k];
        s.synth_lowpass.assign(s.lowpass.rbegin(), s.lowpass.rend());
        s.synth_highpass.assign(s.highpass.rbegin(), s.highpass.rend());
        return s;
    }();
    return spec;
}

std::vector<std::size_t> coeff_lengths(std::size_t n, int levels, const WaveletSpec& spec) {
    if (n < 2) throw std::invalid_argument("coeff_lengths: signal length must be at least 2");
    if (levels < 1) throw std::invalid_argument("coeff_lengths: levels must be at least 1");
    std::vector<std::size_t> out(static_cast<std::size_t>(levels) + 1);
    std::size_t len = n;
    for (int j = 1; j <= levels; ++j) {
        if (len < 2)
            throw std::invalid_argument("coeff_lengths: too many levels for signal length " +
                                        std::to_string(n));
        len = (len + spec.taps() - 1) / 2;
        out[static_cast<std::size_t>(levels - j + 1)] = len; // D_j slot
    }
    out[0] = len; // A_J has the same length as D_J
    return out;
}

void dwt_step(std::span<const double> signal, const WaveletSpec& spec,
              std::vector<double>& approx, std::vector<double>& detail) {
    if (signal.size() < 2) throw std::invalid_argument("dwt_step: signal length must be at least 2");
    const auto L = static_cast<long long>(spec.taps());
    const std::size_t c = (signal.size() + spec.taps() - 1) / 2;
    approx.assign(c, 0.0);
    detail.assign(c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        const long long base = 2 * static_cast<long long>(i) - (L - 2);
        double a = 0.0, d = 0.0;
        for (long long k = 0; k < L; ++k) {
            const double v = ext_at(signal, base + k);
            a += spec.lowpass[static_cast<std::size_t>(k)] * v;
            d += spec.highpass[static_cast<std::size_t>(k)] * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

std::vector<double> idwt_step(std::span<const double> approx, std::span<const double> detail,
                              const WaveletSpec& spec, std::size_t out_len) {
    const std::size_t c = approx.size();
    if (detail.size() != c)
        throw std::invalid_argument("idwt_step: approx/detail lengths differ");
    const std::size_t L = spec.taps();
    if (2 * c < L || (out_len != 2 * c - L + 1 && out_len != 2 * c - L + 2))
        throw std::invalid_argument("idwt_step: out_len " + std::to_string(out_len) +
                                    " inconsistent with " + std::to_string(c) + " coefficients");
    // Upsample-by-two then convolve with the synthesis filters; only taps
    // landing inside [0, c) contribute.
    std::vector<double> out(out_len, 0.0);
    for (std::size_t m = 0; m < out_len; ++m) {
        const std::size_t lo = m / 2;
        const std::size_t hi = std::min(c - 1, (m + L - 2) / 2);
        double s = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            const std::size_t k = 2 * i + 1 - m;
            s += approx[i] * spec.synth_lowpass[k] + detail[i] * spec.synth_highpass[k];
        }
        out[m] = s;
    }
    return out;
}

CoefficientPyramid wavedec(std::span<const double> signal, int levels, const WaveletSpec& spec) {
    coeff_lengths(signal.size(), levels, spec); // validates feasibility
    CoefficientPyramid p;
    p.levels = levels;
    p.original_length = signal.size();
    p.details.reserve(static_cast<std::size_t>(levels));
    std::vector<double> approx(signal.begin(), signal.end());
    for (int j = 0; j < levels; ++j) {
        std::vector<double> next, detail;
        dwt_step(approx, spec, next, detail);
        p.details.push_back(std::move(detail));
        approx = std::move(next);
    }
    p.approx = std::move(approx);
    return p;
}

std::vector<double> waverec(const CoefficientPyramid& p, const WaveletSpec& spec) {
    p.validate(spec);
    // Length of the signal entering each level: lens[0] = original, lens[j]
    // = coefficient count at level j.
    std::vector<std::size_t> lens(static_cast<std::size_t>(p.levels) + 1);
    lens[0] = p.original_length;
    for (int j = 1; j <= p.levels; ++j)
        lens[static_cast<std::size_t>(j)] = (lens[static_cast<std::size_t>(j) - 1] + spec.taps() - 1) / 2;
    std::vector<double> x = p.approx;
    for (int j = p.levels; j >= 1; --j)
        x = idwt_step(x, p.details[static_cast<std::size_t>(j) - 1], spec,
                      lens[static_cast<std::size_t>(j) - 1]);
    return x;
}

std::vector<std::size_t> CoefficientPyramid::band_lengths() const {
    std::vector<std::size_t> out;
    out.reserve(details.size() + 1);
    out.push_back(approx.size());
    for (auto it = details.rbegin(); it != details.rend(); ++it) out.push_back(it->size());
    return out;
}

void CoefficientPyramid::validate(const WaveletSpec& spec) const {
    if (levels < 1 || details.size() != static_cast<std::size_t>(levels))
        throw std::invalid_argument("CoefficientPyramid: levels/details mismatch");
    const auto expected = coeff_lengths(original_length, levels, spec);
    const auto actual = band_lengths();
    if (actual != expected)
        throw std::invalid_argument("CoefficientPyramid: band lengths inconsistent with original length");
    const auto all_finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!all_finite(approx) || !std::all_of(details.begin(), details.end(), all_finite))
        throw std::invalid_argument("CoefficientPyramid: non-finite coefficient");
}

std::vector<std::string> band_names(int levels) {
    if (levels < 1) throw std::invalid_argument("band_names: levels must be at least 1");
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(levels) + 1);
    out.push_back("A" + std::to_string(levels));
    for (int j = levels; j >= 1; --j) out.push_back("D" + std::to_string(j));
    return out;
}

} // namespace sopcast
