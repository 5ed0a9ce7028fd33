#include "sopcast/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sopcast/rng.hpp"

namespace sopcast {

namespace {

constexpr int kModelFormatVersion = 1;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 2)
        throw std::invalid_argument("mlp_new: need at least input and output sizes");
    for (std::size_t s : sizes)
        if (s < 1) throw std::invalid_argument("mlp_new: every layer size must be at least 1");
}

// Per-layer activations (acts[0] is the input) and backprop deltas reused
// across samples during training.
struct Scratch {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> deltas;

    void resize(const MlpModel& m) {
        acts.resize(m.sizes.size());
        deltas.resize(m.sizes.size() - 1);
        for (std::size_t l = 0; l < m.sizes.size(); ++l) acts[l].resize(m.sizes[l]);
        for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) deltas[l].resize(m.sizes[l + 1]);
    }
};

void forward_into(const MlpModel& m, std::span<const double> x, Scratch& s) {
    const std::size_t layers = m.weights.size();
    std::copy(x.begin(), x.end(), s.acts[0].begin());
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = m.sizes[l];
        const std::size_t out = m.sizes[l + 1];
        const double* w = m.weights[l].data();
        const std::vector<double>& prev = s.acts[l];
        std::vector<double>& next = s.acts[l + 1];
        const bool hidden = l + 1 < layers;
        for (std::size_t j = 0; j < out; ++j) {
            double z = m.biases[l][j];
            const double* row = w + j * in;
            for (std::size_t i = 0; i < in; ++i) z += row[i] * prev[i];
            next[j] = hidden ? std::tanh(z) : z;
        }
    }
}

// Accumulates gradients of loss_mse into grad (scaled by `scale`); forward
// pass must already be in the scratch.
void backward_into(const MlpModel& m, std::span<const double> target, Scratch& s,
                   Gradients& grad, double scale) {
    const std::size_t layers = m.weights.size();
    const std::size_t n_out = m.sizes.back();
    std::vector<double>& dout = s.deltas[layers - 1];
    for (std::size_t j = 0; j < n_out; ++j)
        dout[j] = (s.acts[layers][j] - target[j]) / static_cast<double>(n_out);
    for (std::size_t l = layers - 1; l-- > 0;) {
        const std::size_t width = m.sizes[l + 1];
        const std::size_t above = m.sizes[l + 2];
        const double* w = m.weights[l + 1].data();
        const std::vector<double>& dup = s.deltas[l + 1];
        std::vector<double>& dcur = s.deltas[l];
        for (std::size_t i = 0; i < width; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < above; ++j) sum += w[j * width + i] * dup[j];
            const double a = s.acts[l + 1][i];
            dcur[i] = sum * (1.0 - a * a);
        }
    }
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = m.sizes[l];
        const std::size_t out = m.sizes[l + 1];
        const std::vector<double>& prev = s.acts[l];
        const std::vector<double>& delta = s.deltas[l];
        double* gw = grad.weights[l].data();
        for (std::size_t j = 0; j < out; ++j) {
            const double dj = delta[j] * scale;
            double* row = gw + j * in;
            for (std::size_t i = 0; i < in; ++i) row[i] += dj * prev[i];
            grad.biases[l][j] += dj;
        }
    }
}

Gradients zero_gradients(const MlpModel& m) {
    Gradients g;
    g.weights.resize(m.weights.size());
    g.biases.resize(m.biases.size());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        g.weights[l].assign(m.weights[l].size(), 0.0);
        g.biases[l].assign(m.biases[l].size(), 0.0);
    }
    return g;
}

void zero_out(Gradients& g) {
    for (auto& v : g.weights) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : g.biases) std::fill(v.begin(), v.end(), 0.0);
}

double validation_loss(const MlpModel& m, const std::vector<std::vector<double>>& inputs,
                       const std::vector<std::vector<double>>& targets, std::size_t begin,
                       std::size_t end, Scratch& s) {
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        forward_into(m, inputs[i], s);
        total += loss_mse(s.acts.back(), targets[i]);
    }
    return total / static_cast<double>(end - begin);
}

} // namespace

MlpModel mlp_new(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    check_sizes(sizes);
    MlpModel m;
    m.sizes = sizes;
    m.seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::vector<double> w(in * out);
        for (double& v : w) v = rng.uniform(-bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out, 0.0);
    }
    return m;
}

std::vector<double> forward(const MlpModel& m, std::span<const double> x) {
    if (x.size() != m.input_size())
        throw std::invalid_argument("forward: input size " + std::to_string(x.size()) +
                                    " does not match model input " + std::to_string(m.input_size()));
    Scratch s;
    s.resize(m);
    forward_into(m, x, s);
    return s.acts.back();
}

double loss_mse(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size())
        throw std::invalid_argument("loss_mse: prediction/target lengths differ");
    if (pred.empty()) throw std::invalid_argument("loss_mse: empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sum += d * d;
    }
    return 0.5 * sum / static_cast<double>(pred.size());
}

Gradients backward(const MlpModel& m, std::span<const double> x, std::span<const double> target) {
    if (x.size() != m.input_size() || target.size() != m.output_size())
        throw std::invalid_argument("backward: input or target size does not match model");
    Scratch s;
    s.resize(m);
    forward_into(m, x, s);
    Gradients g = zero_gradients(m);
    backward_into(m, target, s, g, 1.0);
    return g;
}

FitResult fit(const MlpModel& m, const std::vector<std::vector<double>>& inputs,
              const std::vector<std::vector<double>>& targets, const TrainConfig& cfg) {
    if (inputs.empty()) throw std::invalid_argument("fit: empty dataset");
    if (inputs.size() != targets.size())
        throw std::invalid_argument("fit: input/target sample counts differ");
    if (inputs.size() < 2)
        throw std::invalid_argument("fit: need at least 2 samples for a validation split");
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].size() != m.input_size() || targets[i].size() != m.output_size())
            throw std::invalid_argument("fit: sample " + std::to_string(i) +
                                        " does not match model dimensions");
    if (cfg.learning_rate <= 0.0) throw std::invalid_argument("fit: learning rate must be positive");
    if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction >= 1.0)
        throw std::invalid_argument("fit: validation fraction must be in (0, 1)");
    if (cfg.patience < 1) throw std::invalid_argument("fit: patience must be at least 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("fit: batch size must be at least 1");
    if (cfg.max_epochs < 0) throw std::invalid_argument("fit: max epochs must be non-negative");

    const std::size_t n = inputs.size();
    const auto raw_val = static_cast<std::size_t>(
        std::llround(cfg.validation_fraction * static_cast<double>(n)));
    const std::size_t n_val = std::clamp<std::size_t>(raw_val, 1, n - 1);
    const std::size_t n_train = n - n_val;

    MlpModel model = m;
    Scratch scratch;
    scratch.resize(model);

    FitResult result;
    result.loss_history.push_back(validation_loss(model, inputs, targets, n_train, n, scratch));
    result.best_epoch = 0;
    double best_loss = result.loss_history[0];
    MlpModel best_model = model;

    Gradients grad = zero_gradients(model);
    Gradients adam_m = zero_gradients(model);
    Gradients adam_v = zero_gradients(model);
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);
    long long step = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, n_train);
            zero_out(grad);
            const double scale = 1.0 / static_cast<double>(stop - start);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = order[b];
                forward_into(model, inputs[idx], scratch);
                backward_into(model, targets[idx], scratch, grad, scale);
            }
            ++step;
            const double corr1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                                  std::vector<double>& mm, std::vector<double>& vv) {
                    for (std::size_t i = 0; i < param.size(); ++i) {
                        mm[i] = kAdamBeta1 * mm[i] + (1.0 - kAdamBeta1) * g[i];
                        vv[i] = kAdamBeta2 * vv[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
                        param[i] -= cfg.learning_rate * (mm[i] / corr1) /
                                    (std::sqrt(vv[i] / corr2) + kAdamEps);
                    }
                };
                update(model.weights[l], grad.weights[l], adam_m.weights[l], adam_v.weights[l]);
                update(model.biases[l], grad.biases[l], adam_m.biases[l], adam_v.biases[l]);
            }
        }
        const double loss = validation_loss(model, inputs, targets, n_train, n, scratch);
        result.loss_history.push_back(loss);
        const auto epoch_index = static_cast<std::size_t>(epoch);
        if (loss < best_loss) {
            best_loss = loss;
            result.best_epoch = epoch_index;
            best_model = model;
        } else if (epoch_index - result.best_epoch >= static_cast<std::size_t>(cfg.patience)) {
            break;
        }
    }
    result.model = std::move(best_model);
    return result;
}

nlohmann::json save_model(const MlpModel& m) {
    nlohmann::json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["sizes"] = m.sizes;
    doc["activation"] = "tanh";
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const std::size_t in = m.sizes[l];
        const std::size_t out = m.sizes[l + 1];
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t j = 0; j < out; ++j) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t i = 0; i < in; ++i) row.push_back(m.weights[l][j * in + i]);
            rows.push_back(std::move(row));
        }
        layers.push_back(std::move(rows));
    }
    doc["weights"] = std::move(layers);
    doc["biases"] = m.biases;
    doc["seed"] = m.seed;
    doc["training_meta"] = nlohmann::json::object();
    return doc;
}

MlpModel load_model(const nlohmann::json& doc) {
    const auto fail = [](const std::string& why) -> MlpModel {
        throw std::runtime_error("load_model: " + why);
    };
    if (!doc.is_object()) return fail("document is not an object");
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer())
        return fail("missing format_version");
    if (doc["format_version"].get<int>() != kModelFormatVersion)
        return fail("unsupported format_version " + doc["format_version"].dump());
    if (!doc.contains("activation") || doc["activation"] != "tanh")
        return fail("unsupported activation");
    if (!doc.contains("sizes") || !doc["sizes"].is_array() || doc["sizes"].size() < 2)
        return fail("missing or invalid sizes");
    if (!doc.contains("weights") || !doc.contains("biases") || !doc.contains("seed"))
        return fail("missing weights, biases, or seed");

    MlpModel m;
    m.sizes = doc["sizes"].get<std::vector<std::size_t>>();
    check_sizes(m.sizes);
    m.seed = doc["seed"].get<std::uint64_t>();
    const auto& weights = doc["weights"];
    const auto& biases = doc["biases"];
    const std::size_t layers = m.sizes.size() - 1;
    if (!weights.is_array() || weights.size() != layers || !biases.is_array() ||
        biases.size() != layers)
        return fail("layer count does not match sizes");
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = m.sizes[l];
        const std::size_t out = m.sizes[l + 1];
        const auto& rows = weights[l];
        if (!rows.is_array() || rows.size() != out)
            return fail("weight shape mismatch in layer " + std::to_string(l));
        std::vector<double> w;
        w.reserve(in * out);
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != in)
                return fail("weight shape mismatch in layer " + std::to_string(l));
            for (const auto& v : row) w.push_back(v.get<double>());
        }
        auto b = biases[l].get<std::vector<double>>();
        if (b.size() != out) return fail("bias shape mismatch in layer " + std::to_string(l));
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(w.begin(), w.end(), finite) || !std::all_of(b.begin(), b.end(), finite))
            return fail("non-finite parameter");
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

} // namespace sopcast
