#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sopcast {

/// Orthogonal filter bank with symmetric (half-point) boundary extension.
/// Analysis filters h/g satisfy the quadrature-mirror relation
/// g[k] = (-1)^k h[L-1-k]; synthesis filters are their time reverses.
struct WaveletSpec {
    std::string name;
    std::vector<double> lowpass;        ///< analysis h
    std::vector<double> highpass;       ///< analysis g
    std::vector<double> synth_lowpass;  ///< h reversed
    std::vector<double> synth_highpass; ///< g reversed

    std::size_t taps() const { return lowpass.size(); }
};

/// The 10-tap Daubechies-5 bank.
const WaveletSpec& db5_filters();

/// Coefficient counts for a J-level decomposition of a length-n signal, in
/// serialization order [A_J, D_J, ..., D_1]. Each level maps a length to
/// floor((len + taps - 1) / 2).
std::vector<std::size_t> coeff_lengths(std::size_t n, int levels, const WaveletSpec& spec);

/// Multilevel decomposition of one window. details[i] holds D_{i+1}, so
/// details.front() is the finest band and details.back() the coarsest.
struct CoefficientPyramid {
    int levels = 0;
    std::size_t original_length = 0;
    std::vector<double> approx;               ///< A_J
    std::vector<std::vector<double>> details; ///< D_1 .. D_J

    /// Lengths in serialization order [A_J, D_J, ..., D_1].
    std::vector<std::size_t> band_lengths() const;
    /// Throws unless band lengths match coeff_lengths(original_length,
    /// levels) and every coefficient is finite.
    void validate(const WaveletSpec& spec) const;
};

/// One analysis step: symmetric extension, filter with h and g, downsample
/// by two. Both outputs get length floor((n + taps - 1) / 2).
void dwt_step(std::span<const double> signal, const WaveletSpec& spec,
              std::vector<double>& approx, std::vector<double>& detail);

/// One synthesis step (adjoint of dwt_step). out_len disambiguates the two
/// signal lengths that produce the given coefficient count.
std::vector<double> idwt_step(std::span<const double> approx, std::span<const double> detail,
                              const WaveletSpec& spec, std::size_t out_len);

CoefficientPyramid wavedec(std::span<const double> signal, int levels, const WaveletSpec& spec);

std::vector<double> waverec(const CoefficientPyramid& p, const WaveletSpec& spec);

/// Band labels in serialization order, e.g. J=5 -> A5, D5, D4, D3, D2, D1.
std::vector<std::string> band_names(int levels);

} // namespace sopcast
