#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hetmia/dataset.hpp"

namespace hetmia {

// Fully connected net: ReLU hidden layers, softmax output.
struct Architecture {
    int input = 0;
    std::vector<int> hidden;
    int output = 0;

    std::size_t layer_count() const { return hidden.size() + 1; }
    void validate() const; // throws config_error on zero-width layers
};

struct LayerParams {
    Matrix weights; // out x in
    Vector bias;    // out
};

struct ModelParams {
    Architecture arch;
    std::vector<LayerParams> layers;

    bool same_shape(const ModelParams& other) const;
    void validate() const; // shapes consistent, entries finite
};

using ModelGrad = std::vector<LayerParams>;

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 1;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double l2 = 0.0; // weight decay on weights only, not biases

    // Global index of this run's first epoch. The shuffle for local epoch j
    // is seeded with mix_seed(seed, epoch_offset + j), which lets a chain of
    // short train() calls reproduce one long call exactly (used by the
    // federated loop).
    std::int64_t epoch_offset = 0;

    void validate() const;
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero,
// deterministic per seed.
ModelParams init_model(const Architecture& arch, std::uint64_t seed);

// Softmax probabilities for one input.
Vector predict(const ModelParams& params, const Vector& x);

// Mean cross-entropy over the batch plus (l2/2) * sum |W|^2. Exact analytic
// gradients when grad is non-null. Throws data_error on an empty batch or a
// label out of range.
double loss_and_grad(const ModelParams& params, const Matrix& xs, std::span<const int> ys,
                     double l2, ModelGrad* grad);

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_history; // per-epoch mean training loss
};

// Seeded-shuffle mini-batch SGD. Aborts with data_error when the loss turns
// non-finite.
TrainResult train(const ModelParams& start, const Matrix& xs, std::span<const int> ys,
                  const TrainConfig& cfg);

// JSON snapshot format: architecture plus a layer list of row-major weight
// arrays and bias arrays.
std::string model_to_json(const ModelParams& params);
ModelParams model_from_json(const std::string& text);
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

} // namespace hetmia
