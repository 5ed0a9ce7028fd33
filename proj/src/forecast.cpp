#include "sopcast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sopcast/stats.hpp"

namespace sopcast {

namespace {

constexpr int kBundleFormatVersion = 1;

// Bands of one window in serialization order: bands[0] = A_J, bands[1] =
// D_J, ..., bands[J] = D_1.
std::vector<std::vector<double>> decompose_bands(std::span<const double> window, int levels) {
    CoefficientPyramid p = wavedec(window, levels, db5_filters());
    std::vector<std::vector<double>> bands(static_cast<std::size_t>(levels) + 1);
    bands[0] = std::move(p.approx);
    for (int j = levels; j >= 1; --j)
        bands[static_cast<std::size_t>(1 + levels - j)] = std::move(p.details[static_cast<std::size_t>(j - 1)]);
    return bands;
}

CoefficientPyramid pyramid_from_bands(std::vector<std::vector<double>>&& bands, int levels,
                                      std::size_t original_length) {
    CoefficientPyramid p;
    p.levels = levels;
    p.original_length = original_length;
    p.approx = std::move(bands[0]);
    p.details.resize(static_cast<std::size_t>(levels));
    for (int j = 1; j <= levels; ++j)
        p.details[static_cast<std::size_t>(j - 1)] =
            std::move(bands[static_cast<std::size_t>(1 + levels - j)]);
    return p;
}

ZScoreStats pooled_stats(const std::vector<std::vector<double>>& rows) {
    std::vector<double> pool;
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    pool.reserve(total);
    for (const auto& r : rows) pool.insert(pool.end(), r.begin(), r.end());
    return zscore_stats(pool);
}

void check_wiring(const Wiring& wiring, const ForecastConfig& cfg) {
    const auto n_bands = static_cast<std::size_t>(cfg.levels) + 1;
    if (wiring.levels != cfg.levels || wiring.inputs.size() != n_bands)
        throw std::invalid_argument("train_forecaster: wiring shape does not match config levels");
    for (const auto& band_inputs : wiring.inputs) {
        for (const auto& in : band_inputs) {
            if (in.band >= n_bands)
                throw std::invalid_argument("train_forecaster: wiring band index out of range");
            if (std::find(cfg.exogenous.begin(), cfg.exogenous.end(), in.channel) ==
                cfg.exogenous.end())
                throw std::invalid_argument("train_forecaster: wired channel '" + in.channel +
                                            "' not in config exogenous set");
        }
    }
}

std::vector<std::string> wired_channels(const Wiring& wiring) {
    std::vector<std::string> out;
    for (const auto& band_inputs : wiring.inputs)
        for (const auto& in : band_inputs)
            if (std::find(out.begin(), out.end(), in.channel) == out.end())
                out.push_back(in.channel);
    return out;
}

nlohmann::json stats_to_json(const ZScoreStats& s) {
    return nlohmann::json{{"mean", s.mean}, {"std", s.std}};
}

ZScoreStats stats_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("mean") || !j.contains("std"))
        throw std::runtime_error("load_bundle: malformed stats entry");
    return ZScoreStats{j["mean"].get<double>(), j["std"].get<double>()};
}

} // namespace

ForecastConfig ForecastConfig::short_term() {
    ForecastConfig cfg;
    cfg.scale = "short";
    cfg.window = 36;
    cfg.horizon = 12;
    cfg.levels = 5;
    cfg.step = 1.0;
    cfg.exogenous = {"wind_gust"};
    return cfg;
}

ForecastConfig ForecastConfig::long_term() {
    ForecastConfig cfg;
    cfg.scale = "long";
    cfg.window = 48;
    cfg.horizon = 24;
    cfg.levels = 5;
    cfg.step = 1800.0;
    cfg.exogenous = {"temperature", "humidity"};
    return cfg;
}

void ForecastConfig::validate() const {
    if (scale != "short" && scale != "long")
        throw std::invalid_argument("ForecastConfig: scale must be \"short\" or \"long\"");
    if (window <= horizon || horizon < 1)
        throw std::invalid_argument("ForecastConfig: require window > horizon >= 1");
    if (levels < 1) throw std::invalid_argument("ForecastConfig: levels must be at least 1");
    if (step <= 0.0) throw std::invalid_argument("ForecastConfig: step must be positive");
    if (ema_alpha <= 0.0 || ema_alpha > 1.0)
        throw std::invalid_argument("ForecastConfig: ema_alpha must be in (0, 1]");
    for (const auto& ch : exogenous)
        if (ch != "wind_gust" && ch != "temperature" && ch != "humidity")
            throw std::invalid_argument("ForecastConfig: unsupported exogenous channel '" + ch + "'");
}

WiringPolicy wiring_policy_from_string(const std::string& name) {
    if (name == "top1") return WiringPolicy::kTop1;
    if (name == "approx") return WiringPolicy::kApprox;
    throw std::invalid_argument("unknown wiring policy '" + name + "'");
}

std::string to_string(WiringPolicy policy) {
    return policy == WiringPolicy::kTop1 ? "top1" : "approx";
}

BandCorrelations band_correlations(const WindowedDataset& dataset,
                                   const std::vector<std::string>& channels,
                                   const ForecastConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("band_correlations: empty dataset");
    for (const auto& ch : channels)
        if (dataset.exogenous.find(ch) == dataset.exogenous.end())
            throw std::invalid_argument("band_correlations: dataset lacks channel '" + ch + "'");

    const auto n_bands = static_cast<std::size_t>(cfg.levels) + 1;
    std::vector<std::vector<double>> sop_pool(n_bands);
    for (const auto& window : dataset.inputs) {
        auto bands = decompose_bands(window, cfg.levels);
        for (std::size_t b = 0; b < n_bands; ++b)
            sop_pool[b].insert(sop_pool[b].end(), bands[b].begin(), bands[b].end());
    }

    BandCorrelations out;
    out.levels = cfg.levels;
    out.channels = channels;
    for (const auto& ch : channels) {
        std::vector<std::vector<double>> exo_pool(n_bands);
        for (const auto& window : dataset.exogenous.at(ch)) {
            auto bands = decompose_bands(window, cfg.levels);
            for (std::size_t b = 0; b < n_bands; ++b)
                exo_pool[b].insert(exo_pool[b].end(), bands[b].begin(), bands[b].end());
        }
        std::vector<double> r(n_bands);
        std::vector<bool> degenerate(n_bands);
        for (std::size_t b = 0; b < n_bands; ++b) {
            bool flag = false;
            r[b] = pearson(sop_pool[b], exo_pool[b], &flag);
            degenerate[b] = flag;
        }
        out.r.push_back(std::move(r));
        out.degenerate.push_back(std::move(degenerate));
    }
    return out;
}

Wiring select_exogenous_bands(const BandCorrelations& c, WiringPolicy policy) {
    const auto n_bands = static_cast<std::size_t>(c.levels) + 1;
    Wiring w;
    w.levels = c.levels;
    w.inputs.resize(n_bands);
    for (std::size_t ci = 0; ci < c.channels.size(); ++ci) {
        std::size_t pick = 0;
        if (policy == WiringPolicy::kTop1) {
            for (std::size_t b = 1; b < n_bands; ++b)
                if (std::abs(c.r[ci][b]) > std::abs(c.r[ci][pick])) pick = b;
        }
        w.inputs[pick].push_back(BandInput{c.channels[ci], pick});
    }
    return w;
}

ForecasterBundle train_forecaster(const WindowedDataset& train, const ForecastConfig& cfg,
                                  const Wiring& wiring, const TrainConfig& tcfg) {
    cfg.validate();
    if (train.empty()) throw std::invalid_argument("train_forecaster: empty dataset");
    if (train.window != cfg.window || train.horizon != cfg.horizon)
        throw std::invalid_argument("train_forecaster: dataset geometry does not match config");
    check_wiring(wiring, cfg);
    const auto channels = wired_channels(wiring);
    for (const auto& ch : channels)
        if (train.exogenous.find(ch) == train.exogenous.end())
            throw std::invalid_argument("train_forecaster: dataset lacks wired channel '" + ch + "'");

    const auto n_bands = static_cast<std::size_t>(cfg.levels) + 1;
    const std::size_t n = train.size();

    // Per band: one coefficient vector per sample, for inputs, targets, and
    // each wired channel.
    const auto decompose_all = [&](const std::vector<std::vector<double>>& windows) {
        std::vector<std::vector<std::vector<double>>> per_band(n_bands);
        for (auto& v : per_band) v.reserve(n);
        for (const auto& window : windows) {
            auto bands = decompose_bands(window, cfg.levels);
            for (std::size_t b = 0; b < n_bands; ++b) per_band[b].push_back(std::move(bands[b]));
        }
        return per_band;
    };
    const auto sop_bands = decompose_all(train.inputs);
    const auto target_bands = decompose_all(train.targets);
    std::map<std::string, std::vector<std::vector<std::vector<double>>>> exo_bands;
    for (const auto& ch : channels) exo_bands[ch] = decompose_all(train.exogenous.at(ch));

    ForecasterBundle bundle;
    bundle.config = cfg;
    bundle.wiring = wiring;
    bundle.input_stats.resize(n_bands);
    bundle.target_stats.resize(n_bands);
    for (std::size_t b = 0; b < n_bands; ++b) {
        bundle.input_stats[b] = pooled_stats(sop_bands[b]);
        bundle.target_stats[b] = pooled_stats(target_bands[b]);
    }
    for (const auto& ch : channels) {
        auto& per_band = bundle.exo_stats[ch];
        per_band.resize(n_bands);
        for (std::size_t b = 0; b < n_bands; ++b) per_band[b] = pooled_stats(exo_bands.at(ch)[b]);
    }

    for (std::size_t b = 0; b < n_bands; ++b) {
        const std::size_t band_len = sop_bands[b].front().size();
        std::size_t in_dim = band_len;
        for (const auto& in : wiring.inputs[b]) in_dim += exo_bands.at(in.channel)[in.band].front().size();

        std::vector<std::vector<double>> inputs(n), targets(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x = zscore_apply(sop_bands[b][i], bundle.input_stats[b]);
            x.reserve(in_dim);
            for (const auto& in : wiring.inputs[b]) {
                const auto z = zscore_apply(exo_bands.at(in.channel)[in.band][i],
                                            bundle.exo_stats.at(in.channel)[in.band]);
                x.insert(x.end(), z.begin(), z.end());
            }
            inputs[i] = std::move(x);
            targets[i] = zscore_apply(target_bands[b][i], bundle.target_stats[b]);
        }

        TrainConfig band_cfg = tcfg;
        band_cfg.seed = tcfg.seed + b;
        MlpModel init = mlp_new({in_dim, tcfg.hidden_units, band_len}, band_cfg.seed);
        bundle.band_models.push_back(fit(init, inputs, targets, band_cfg).model);
    }
    return bundle;
}

std::vector<double> predict(const ForecasterBundle& b, std::span<const double> sop_window,
                            const std::map<std::string, std::vector<double>>& exo_windows) {
    const auto W = static_cast<std::size_t>(b.config.window);
    if (sop_window.size() != W)
        throw std::invalid_argument("predict: window length does not match config");
    const auto n_bands = static_cast<std::size_t>(b.config.levels) + 1;
    if (b.band_models.size() != n_bands)
        throw std::invalid_argument("predict: bundle is missing band models");

    auto sop_bands = decompose_bands(sop_window, b.config.levels);
    std::map<std::string, std::vector<std::vector<double>>> exo_bands;
    for (const auto& ch : wired_channels(b.wiring)) {
        const auto it = exo_windows.find(ch);
        if (it == exo_windows.end())
            throw std::invalid_argument("predict: missing exogenous window for channel '" + ch + "'");
        if (it->second.size() != W)
            throw std::invalid_argument("predict: exogenous window length does not match config");
        exo_bands[ch] = decompose_bands(it->second, b.config.levels);
    }

    std::vector<std::vector<double>> out_bands(n_bands);
    for (std::size_t band = 0; band < n_bands; ++band) {
        std::vector<double> x = zscore_apply(sop_bands[band], b.input_stats[band]);
        for (const auto& in : b.wiring.inputs[band]) {
            const auto z = zscore_apply(exo_bands.at(in.channel)[in.band],
                                        b.exo_stats.at(in.channel)[in.band]);
            x.insert(x.end(), z.begin(), z.end());
        }
        const auto z_pred = forward(b.band_models[band], x);
        if (z_pred.size() != sop_bands[band].size())
            throw std::invalid_argument("predict: band model output length mismatch");
        out_bands[band] = zscore_invert(z_pred, b.target_stats[band]);
    }

    const auto reconstructed =
        waverec(pyramid_from_bands(std::move(out_bands), b.config.levels, W), db5_filters());
    const auto H = static_cast<std::size_t>(b.config.horizon);
    return {reconstructed.end() - static_cast<std::ptrdiff_t>(H), reconstructed.end()};
}

std::vector<double> predict_multi(const ForecasterBundle& b, std::span<const double> sop_history,
                                  const std::map<std::string, std::vector<double>>& exo,
                                  std::size_t n_steps) {
    const auto W = static_cast<std::size_t>(b.config.window);
    const auto H = static_cast<std::size_t>(b.config.horizon);
    if (sop_history.size() < W)
        throw std::invalid_argument("predict_multi: history shorter than one window");
    if (n_steps < 1) throw std::invalid_argument("predict_multi: n_steps must be at least 1");
    const std::size_t rolls = (n_steps + H - 1) / H;
    const std::size_t n = sop_history.size();
    const std::size_t needed = n + (rolls - 1) * H;
    const auto channels = wired_channels(b.wiring);
    for (const auto& ch : channels) {
        const auto it = exo.find(ch);
        if (it == exo.end())
            throw std::invalid_argument("predict_multi: missing exogenous channel '" + ch + "'");
        if (it->second.size() < needed)
            throw std::invalid_argument("predict_multi: channel '" + ch + "' has " +
                                        std::to_string(it->second.size()) + " samples, need " +
                                        std::to_string(needed));
    }

    std::vector<double> extended(sop_history.begin(), sop_history.end());
    std::map<std::string, std::vector<double>> exo_window;
    for (std::size_t r = 0; r < rolls; ++r) {
        const std::size_t end = n + r * H;
        const std::span<const double> window(extended.data() + (end - W), W);
        for (const auto& ch : channels) {
            const auto& full = exo.at(ch);
            exo_window[ch].assign(full.begin() + static_cast<std::ptrdiff_t>(end - W),
                                  full.begin() + static_cast<std::ptrdiff_t>(end));
        }
        const auto step = predict(b, window, exo_window);
        extended.insert(extended.end(), step.begin(), step.end());
    }
    return {extended.begin() + static_cast<std::ptrdiff_t>(n),
            extended.begin() + static_cast<std::ptrdiff_t>(n + n_steps)};
}

std::vector<double> moving_average_forecast(std::span<const double> history, std::size_t k,
                                            std::size_t horizon) {
    if (k < 1) throw std::invalid_argument("moving_average_forecast: k must be at least 1");
    if (history.size() < k)
        throw std::invalid_argument("moving_average_forecast: history shorter than k");
    if (horizon < 1) throw std::invalid_argument("moving_average_forecast: horizon must be at least 1");
    double sum = 0.0;
    for (std::size_t i = history.size() - k; i < history.size(); ++i) sum += history[i];
    return std::vector<double>(horizon, sum / static_cast<double>(k));
}

PlainAnnModel train_plain_ann(const WindowedDataset& train, const ForecastConfig& cfg,
                              const TrainConfig& tcfg) {
    cfg.validate();
    if (train.empty()) throw std::invalid_argument("train_plain_ann: empty dataset");
    if (train.window != cfg.window || train.horizon != cfg.horizon)
        throw std::invalid_argument("train_plain_ann: dataset geometry does not match config");

    const auto W = static_cast<std::size_t>(cfg.window);
    const auto H = static_cast<std::size_t>(cfg.horizon);
    const std::size_t n = train.size();

    PlainAnnModel out;
    out.window = cfg.window;
    out.horizon = cfg.horizon;
    out.input_stats = pooled_stats(train.inputs);
    std::vector<std::vector<double>> futures(n);
    for (std::size_t i = 0; i < n; ++i)
        futures[i].assign(train.targets[i].end() - static_cast<std::ptrdiff_t>(H),
                          train.targets[i].end());
    out.target_stats = pooled_stats(futures);

    std::vector<std::vector<double>> inputs(n), targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        inputs[i] = zscore_apply(train.inputs[i], out.input_stats);
        targets[i] = zscore_apply(futures[i], out.target_stats);
    }
    MlpModel init = mlp_new({W, tcfg.hidden_units, H}, tcfg.seed);
    out.model = fit(init, inputs, targets, tcfg).model;
    return out;
}

std::vector<double> plain_ann_predict(const PlainAnnModel& m, std::span<const double> window) {
    if (window.size() != static_cast<std::size_t>(m.window))
        throw std::invalid_argument("plain_ann_predict: window length mismatch");
    const auto z = zscore_apply(window, m.input_stats);
    return zscore_invert(forward(m.model, z), m.target_stats);
}

nlohmann::json save_bundle(const ForecasterBundle& b) {
    nlohmann::json doc;
    doc["format_version"] = kBundleFormatVersion;
    doc["config"] = {{"scale", b.config.scale},       {"window", b.config.window},
                     {"horizon", b.config.horizon},   {"levels", b.config.levels},
                     {"step", b.config.step},         {"ema_alpha", b.config.ema_alpha},
                     {"exogenous", b.config.exogenous}};
    nlohmann::json wiring_inputs = nlohmann::json::array();
    for (const auto& band_inputs : b.wiring.inputs) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& in : band_inputs)
            list.push_back({{"channel", in.channel}, {"band", in.band}});
        wiring_inputs.push_back(std::move(list));
    }
    doc["wiring"] = {{"levels", b.wiring.levels}, {"inputs", std::move(wiring_inputs)}};
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : b.band_models) models.push_back(save_model(m));
    doc["band_models"] = std::move(models);
    nlohmann::json stats;
    stats["input"] = nlohmann::json::array();
    stats["target"] = nlohmann::json::array();
    for (const auto& s : b.input_stats) stats["input"].push_back(stats_to_json(s));
    for (const auto& s : b.target_stats) stats["target"].push_back(stats_to_json(s));
    stats["exogenous"] = nlohmann::json::object();
    for (const auto& [ch, per_band] : b.exo_stats) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& s : per_band) list.push_back(stats_to_json(s));
        stats["exogenous"][ch] = std::move(list);
    }
    doc["band_stats"] = std::move(stats);
    return doc;
}

ForecasterBundle load_bundle(const nlohmann::json& doc) {
    const auto fail = [](const std::string& why) -> ForecasterBundle {
        throw std::runtime_error("load_bundle: " + why);
    };
    if (!doc.is_object() || !doc.contains("format_version")) return fail("missing format_version");
    if (doc["format_version"].get<int>() != kBundleFormatVersion)
        return fail("unsupported format_version " + doc["format_version"].dump());
    for (const char* key : {"config", "wiring", "band_models", "band_stats"})
        if (!doc.contains(key)) return fail(std::string("missing ") + key);

    ForecasterBundle b;
    const auto& cfg = doc["config"];
    b.config.scale = cfg.at("scale").get<std::string>();
    b.config.window = cfg.at("window").get<int>();
    b.config.horizon = cfg.at("horizon").get<int>();
    b.config.levels = cfg.at("levels").get<int>();
    b.config.step = cfg.at("step").get<double>();
    b.config.ema_alpha = cfg.at("ema_alpha").get<double>();
    b.config.exogenous = cfg.at("exogenous").get<std::vector<std::string>>();
    b.config.validate();

    const auto n_bands = static_cast<std::size_t>(b.config.levels) + 1;
    const auto& wiring = doc["wiring"];
    b.wiring.levels = wiring.at("levels").get<int>();
    const auto& inputs = wiring.at("inputs");
    if (b.wiring.levels != b.config.levels || !inputs.is_array() || inputs.size() != n_bands)
        return fail("wiring shape mismatch");
    for (const auto& band_inputs : inputs) {
        std::vector<BandInput> list;
        for (const auto& in : band_inputs)
            list.push_back(BandInput{in.at("channel").get<std::string>(),
                                     in.at("band").get<std::size_t>()});
        b.wiring.inputs.push_back(std::move(list));
    }

    const auto& models = doc["band_models"];
    if (!models.is_array() || models.size() != n_bands) return fail("band model count mismatch");
    for (const auto& m : models) b.band_models.push_back(load_model(m));

    const auto& stats = doc["band_stats"];
    const auto& input = stats.at("input");
    const auto& target = stats.at("target");
    if (input.size() != n_bands || target.size() != n_bands) return fail("band stats count mismatch");
    for (const auto& s : input) b.input_stats.push_back(stats_from_json(s));
    for (const auto& s : target) b.target_stats.push_back(stats_from_json(s));
    for (const auto& [ch, list] : stats.at("exogenous").items()) {
        if (list.size() != n_bands) return fail("exogenous stats count mismatch");
        auto& per_band = b.exo_stats[ch];
        for (const auto& s : list) per_band.push_back(stats_from_json(s));
    }
    return b;
}

} // namespace sopcast
