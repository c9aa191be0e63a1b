#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "qipf/datasets.hpp"
#include "qipf/matrix.hpp"
#include "qipf/predictions.hpp"

namespace qipf {

// Small dense classifier: ReLU hidden layers, identity output (softmax is
// applied only inside the training loss). Deterministic per seed.
struct ToyModel {
    std::vector<int> layer_sizes;        // [d_in, hidden..., k]
    std::vector<Matrix> weights;         // per layer, fan_in x fan_out
    std::vector<std::vector<double>> biases;
    double dropout_rate = 0.2;           // used by the MC-dropout baseline only
    std::uint64_t seed = 0;
    int trained_epochs = 0;
    double learning_rate = 0.0;
    double train_accuracy = 0.0;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
};

// Adam + categorical cross-entropy on the softmax of the logits; minibatch
// order reshuffled per epoch from the seed. Hidden sizes default to {64, 32}.
ToyModel train(const Dataset& data, int epochs, double learning_rate,
               std::uint64_t seed, std::vector<int> hidden = {64, 32});

std::vector<double> forward_logits(const ToyModel& model, std::span<const double> input);

PredictionSet predict_raw(const ToyModel& model, const Matrix& inputs,
                          const std::vector<int>& labels);

std::vector<double> softmax(std::span<const double> logits);

// Mask provider for a stochastic pass: fills `keep` (one flag per unit of a
// layer input) for dense layer `layer` of run `run`.
using DropoutMaskSource =
    std::function<void(int run, int layer, std::span<std::uint8_t> keep)>;

// Forward pass with inverted dropout applied to the input of every dense
// layer; kept units are scaled by 1/(1-rate).
std::vector<double> forward_with_dropout(const ToyModel& model,
                                         std::span<const double> input, double rate,
                                         int run, const DropoutMaskSource& masks);

// Std (population) of the max-softmax probability across `runs` seeded
// stochastic passes.
double mc_dropout_score(const ToyModel& model, std::span<const double> input,
                        double rate, int runs, std::uint64_t seed);

// Std (population) of the max-softmax probability across ensemble members.
double ensemble_score(std::span<const ToyModel> models, std::span<const double> input);

// Versioned JSON serialization; reload is bit-exact.
void save_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_model(const std::filesystem::path& path);

} // namespace qipf
