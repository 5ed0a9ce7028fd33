#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace sopcast {

/// Fully connected network with tanh hidden layers and an identity output
/// layer. weights[l] is row-major (sizes[l+1] x sizes[l]); biases[l] has
/// sizes[l+1] entries.
struct MlpModel {
    std::vector<std::size_t> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::uint64_t seed = 0;

    std::size_t input_size() const { return sizes.front(); }
    std::size_t output_size() const { return sizes.back(); }
};

/// Parameter gradients, same shapes as MlpModel weights/biases.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    int max_epochs = 200;
    int patience = 10;
    double validation_fraction = 0.2;
    std::size_t hidden_units = 32;
    std::uint64_t seed = 1;
};

struct FitResult {
    MlpModel model;                   ///< parameters from the best validation epoch
    std::vector<double> loss_history; ///< validation loss per epoch; entry 0 is pre-training
    std::size_t best_epoch = 0;       ///< index into loss_history
};

/// Glorot-uniform weights drawn from the given seed, zero biases.
MlpModel mlp_new(const std::vector<std::size_t>& sizes, std::uint64_t seed);

std::vector<double> forward(const MlpModel& m, std::span<const double> x);

/// Half mean squared error over the output vector.
double loss_mse(std::span<const double> pred, std::span<const double> target);

/// Gradients of loss_mse(forward(m, x), target) for every parameter.
Gradients backward(const MlpModel& m, std::span<const double> x, std::span<const double> target);

/// Adam training with a chronological validation split (the last
/// validation_fraction of the samples). Stops after `patience` epochs
/// without validation improvement or at max_epochs, whichever comes first.
FitResult fit(const MlpModel& m, const std::vector<std::vector<double>>& inputs,
              const std::vector<std::vector<double>>& targets, const TrainConfig& cfg);

nlohmann::json save_model(const MlpModel& m);

/// Rejects unknown format versions and malformed or shape-inconsistent
/// documents; never returns a partially loaded model.
MlpModel load_model(const nlohmann::json& doc);

} // namespace sopcast
