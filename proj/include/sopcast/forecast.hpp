#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "sopcast/neural.hpp"
#include "sopcast/series.hpp"
#include "sopcast/wavelet.hpp"

namespace sopcast {

/// Geometry and exogenous channel set for one forecasting scale.
struct ForecastConfig {
    std::string scale = "short";        ///< "short" or "long"
    int window = 36;                    ///< W
    int horizon = 12;                   ///< H
    int levels = 5;                     ///< J
    double step = 1.0;                  ///< seconds between samples
    double ema_alpha = 0.1;             ///< denoising strength
    std::vector<std::string> exogenous; ///< channels available to the model

    /// W=36, H=12, 1 s step, wind gust exogenous (the windy model; clear
    /// `exogenous` for the calm variant).
    static ForecastConfig short_term();
    /// W=48, H=24, 1800 s step, temperature + humidity exogenous.
    static ForecastConfig long_term();

    void validate() const;
};

/// Pearson r between SOP and exogenous coefficients, one row per channel,
/// bands in serialization order [A_J, D_J, ..., D_1].
struct BandCorrelations {
    int levels = 0;
    std::vector<std::string> channels;
    std::vector<std::vector<double>> r;
    std::vector<std::vector<bool>> degenerate; ///< zero-variance flags
};

/// One exogenous coefficient input: `band`'s coefficients of `channel`.
struct BandInput {
    std::string channel;
    std::size_t band = 0;
};

/// inputs[b] lists the exogenous inputs of band b's model (serialization
/// order; b=0 is the approximation model).
struct Wiring {
    int levels = 0;
    std::vector<std::vector<BandInput>> inputs;
};

enum class WiringPolicy { kTop1, kApprox };

WiringPolicy wiring_policy_from_string(const std::string& name);
std::string to_string(WiringPolicy policy);

/// Trained per-band models plus the normalization statistics needed to
/// reproduce predictions exactly.
struct ForecasterBundle {
    ForecastConfig config;
    Wiring wiring;
    std::vector<MlpModel> band_models;                          ///< levels+1 models
    std::vector<ZScoreStats> input_stats;                       ///< per band, SOP coefficients
    std::vector<ZScoreStats> target_stats;                      ///< per band, target coefficients
    std::map<std::string, std::vector<ZScoreStats>> exo_stats;  ///< per wired channel, per band
};

/// Decompose every SOP and channel window, pool coefficients per band, and
/// correlate. Requested channels must be present in the dataset.
BandCorrelations band_correlations(const WindowedDataset& dataset,
                                   const std::vector<std::string>& channels,
                                   const ForecastConfig& cfg);

/// kTop1: per channel, wire the band with the largest |r| into that band's
/// model, ties broken toward the coarsest band. kApprox: wire every
/// channel's approximation coefficients into the approximation model
/// unconditionally, the default band-to-band layout.
Wiring select_exogenous_bands(const BandCorrelations& c, WiringPolicy policy);

ForecasterBundle train_forecaster(const WindowedDataset& train, const ForecastConfig& cfg,
                                  const Wiring& wiring, const TrainConfig& tcfg);

/// Band-wise coefficient prediction, inverse z-score, reconstruction; the
/// forecast is the last H samples of the reconstructed shifted window.
std::vector<double> predict(const ForecasterBundle& b, std::span<const double> sop_window,
                            const std::map<std::string, std::vector<double>>& exo_windows);

/// Rolls predict forward by feeding forecasts back as history until n_steps
/// values are produced. exo series are aligned with sop_history's start and
/// must extend far enough to cover every rolled input window.
std::vector<double> predict_multi(const ForecasterBundle& b, std::span<const double> sop_history,
                                  const std::map<std::string, std::vector<double>>& exo,
                                  std::size_t n_steps);

/// Trailing mean of the last k values, repeated flat over the horizon.
std::vector<double> moving_average_forecast(std::span<const double> history, std::size_t k,
                                            std::size_t horizon);

/// Direct W -> H regression on the raw series, no decomposition.
struct PlainAnnModel {
    int window = 0;
    int horizon = 0;
    MlpModel model;
    ZScoreStats input_stats;
    ZScoreStats target_stats;
};

PlainAnnModel train_plain_ann(const WindowedDataset& train, const ForecastConfig& cfg,
                              const TrainConfig& tcfg);
std::vector<double> plain_ann_predict(const PlainAnnModel& m, std::span<const double> window);

nlohmann::json save_bundle(const ForecasterBundle& b);
ForecasterBundle load_bundle(const nlohmann::json& doc);

} // namespace sopcast
