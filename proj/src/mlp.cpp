#include "qipf/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qipf/errors.hpp"
#include "qipf/rng.hpp"

namespace qipf {

namespace {

constexpr int kBatchSize = 32;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct LayerGrads {
    Matrix weights;
    std::vector<double> biases;
};

void check_input_dim(const ToyModel& model, std::size_t dim) {
    if (dim != static_cast<std::size_t>(model.input_dim()))
        throw ShapeError("input dimension " + std::to_string(dim) +
                         " does not match model input " +
                         std::to_string(model.input_dim()));
}

// Dense layer: out = act W + b, one row at a time.
void dense_forward(const Matrix& w, const std::vector<double>& b,
                   std::span<const double> in, std::vector<double>& out) {
    out.assign(b.begin(), b.end());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double a = in[i];
        if (a == 0.0) continue;
        auto row = w.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) out[j] += a * row[j];
    }
}

} // namespace

std::vector<double> softmax(std::span<const double> logits) {
    double peak = logits[0];
    for (double v : logits) peak = std::max(peak, v);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        p[j] = std::exp(logits[j] - peak);
        sum += p[j];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::vector<double> forward_logits(const ToyModel& model, std::span<const double> input) {
    check_input_dim(model, input.size());
    std::vector<double> act(input.begin(), input.end());
    std::vector<double> next;
    const std::size_t n_layers = model.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        dense_forward(model.weights[l], model.biases[l], act, next);
        if (l + 1 < n_layers)
            for (double& v : next) v = std::max(0.0, v);
        act.swap(next);
    }
    return act;
}

ToyModel train(const Dataset& data, int epochs, double learning_rate,
               std::uint64_t seed, std::vector<int> hidden) {
    if (epochs < 1) throw InvalidParameterError("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidParameterError("learning rate must be > 0");
    if (data.classes < 2) throw InvalidParameterError("training needs >= 2 classes");
    if (data.size() == 0) throw InvalidParameterError("training set is empty");
    for (int label : data.labels)
        if (label < 0 || label >= data.classes)
            throw DataError("label " + std::to_string(label) + " outside [0, " +
                            std::to_string(data.classes) + ")");

    ToyModel model;
    model.seed = seed;
    model.learning_rate = learning_rate;
    model.layer_sizes.push_back(static_cast<int>(data.features.cols()));
    for (int h : hidden) model.layer_sizes.push_back(h);
    model.layer_sizes.push_back(data.classes);

    const std::size_t n_layers = model.layer_sizes.size() - 1;
    Rng rng(seed);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int fan_in = model.layer_sizes[l];
        const int fan_out = model.layer_sizes[l + 1];
        Matrix w(fan_in, fan_out);
        const double scale = std::sqrt(2.0 / fan_in);
        for (double& v : w.storage()) v = scale * rng.normal();
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }

    // Adam state, one slot per parameter tensor.
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
    for (std::size_t l = 0; l < n_layers; ++l) {
        mw.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        vw.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        mb.emplace_back(model.biases[l].size(), 0.0);
        vb.emplace_back(model.biases[l].size(), 0.0);
    }

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::vector<std::vector<double>> acts(n_layers + 1);
    std::vector<std::vector<double>> deltas(n_layers);
    std::vector<LayerGrads> grads(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        grads[l].weights = Matrix(model.weights[l].rows(), model.weights[l].cols());
        grads[l].biases.assign(model.biases[l].size(), 0.0);
    }

    long adam_step = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += kBatchSize) {
            const std::size_t stop = std::min(n, start + kBatchSize);
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grads) {
                std::fill(g.weights.storage().begin(), g.weights.storage().end(), 0.0);
                std::fill(g.biases.begin(), g.biases.end(), 0.0);
            }

            for (std::size_t idx = start; idx < stop; ++idx) {
                const std::size_t row = order[idx];
                auto input = data.features.row(row);
                acts[0].assign(input.begin(), input.end());
                for (std::size_t l = 0; l < n_layers; ++l) {
                    dense_forward(model.weights[l], model.biases[l], acts[l], acts[l + 1]);
                    if (l + 1 < n_layers)
                        for (double& v : acts[l + 1]) v = std::max(0.0, v);
                }

                std::vector<double> prob = softmax(acts[n_layers]);
                const int label = data.labels[row];
                epoch_loss -= std::log(std::max(prob[label], 1e-300));

                deltas[n_layers - 1] = prob;
                deltas[n_layers - 1][label] -= 1.0;
                for (std::size_t l = n_layers - 1; l > 0; --l) {
                    auto& d = deltas[l];
                    auto& prev = deltas[l - 1];
                    prev.assign(model.layer_sizes[l], 0.0);
                    for (std::size_t i = 0; i < model.weights[l].rows(); ++i) {
                        if (acts[l][i] <= 0.0) continue; // ReLU gate
                        auto wrow = model.weights[l].row(i);
                        double s = 0.0;
                        for (std::size_t j = 0; j < wrow.size(); ++j) s += wrow[j] * d[j];
                        prev[i] = s;
                    }
                }
                for (std::size_t l = 0; l < n_layers; ++l) {
                    auto& g = grads[l];
                    const auto& in = acts[l];
                    const auto& d = deltas[l];
                    for (std::size_t i = 0; i < g.weights.rows(); ++i) {
                        if (in[i] == 0.0) continue;
                        auto grow = g.weights.row(i);
                        for (std::size_t j = 0; j < grow.size(); ++j)
                            grow[j] += in[i] * d[j];
                    }
                    for (std::size_t j = 0; j < g.biases.size(); ++j) g.biases[j] += d[j];
                }
            }

            ++adam_step;
            const double bias1 = 1.0 - std::pow(kAdamBeta1, adam_step);
            const double bias2 = 1.0 - std::pow(kAdamBeta2, adam_step);
            for (std::size_t l = 0; l < n_layers; ++l) {
                auto& w = model.weights[l].storage();
                auto& gw = grads[l].weights.storage();
                auto& m1 = mw[l].storage();
                auto& v1 = vw[l].storage();
                for (std::size_t t = 0; t < w.size(); ++t) {
                    const double g = gw[t] * inv_batch;
                    m1[t] = kAdamBeta1 * m1[t] + (1.0 - kAdamBeta1) * g;
                    v1[t] = kAdamBeta2 * v1[t] + (1.0 - kAdamBeta2) * g * g;
                    w[t] -= learning_rate * (m1[t] / bias1) /
                            (std::sqrt(v1[t] / bias2) + kAdamEps);
                }
                auto& b = model.biases[l];
                auto& gb = grads[l].biases;
                auto& m2 = mb[l];
                auto& v2 = vb[l];
                for (std::size_t t = 0; t < b.size(); ++t) {
                    const double g = gb[t] * inv_batch;
                    m2[t] = kAdamBeta1 * m2[t] + (1.0 - kAdamBeta1) * g;
                    v2[t] = kAdamBeta2 * v2[t] + (1.0 - kAdamBeta2) * g * g;
                    b[t] -= learning_rate * (m2[t] / bias1) /
                            (std::sqrt(v2[t] / bias2) + kAdamEps);
                }
            }
        }
        // ReLU maps NaN activations to zero, so gradient poisoning can leave
        // the loss finite; check the parameters as well.
        bool finite = std::isfinite(epoch_loss);
        for (std::size_t l = 0; finite && l < n_layers; ++l) {
            for (double v : model.weights[l].storage())
                if (!std::isfinite(v)) finite = false;
            for (double v : model.biases[l])
                if (!std::isfinite(v)) finite = false;
        }
        if (!finite)
            throw TrainingDivergedError(
                "loss or weights became non-finite at epoch " +
                    std::to_string(epoch + 1),
                epoch + 1);
    }

    model.trained_epochs = epochs;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto logits = forward_logits(model, data.features.row(i));
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.size(); ++j)
            if (logits[j] > logits[best]) best = j;
        if (static_cast<int>(best) == data.labels[i]) ++hits;
    }
    model.train_accuracy = static_cast<double>(hits) / static_cast<double>(n);
    return model;
}

PredictionSet predict_raw(const ToyModel& model, const Matrix& inputs,
                          const std::vector<int>& labels) {
    if (inputs.rows() != labels.size())
        throw ShapeError("inputs and labels differ in length");
    check_input_dim(model, inputs.cols());
    Matrix logits(inputs.rows(), static_cast<std::size_t>(model.output_dim()));
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        auto out = forward_logits(model, inputs.row(i));
        std::copy(out.begin(), out.end(), logits.row(i).begin());
    }
    return PredictionSet::from_logits(std::move(logits), labels);
}

std::vector<double> forward_with_dropout(const ToyModel& model,
                                         std::span<const double> input, double rate,
                                         int run, const DropoutMaskSource& masks) {
    check_input_dim(model, input.size());
    if (!(rate >= 0.0 && rate < 1.0))
        throw InvalidParameterError("dropout rate must be in [0, 1)");

    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> act(input.begin(), input.end());
    std::vector<double> next;
    std::vector<std::uint8_t> keep;
    const std::size_t n_layers = model.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        if (rate > 0.0) {
            keep.assign(act.size(), 1);
            masks(run, static_cast<int>(l), keep);
            for (std::size_t i = 0; i < act.size(); ++i)
                act[i] = keep[i] ? act[i] * keep_scale : 0.0;
        }
        dense_forward(model.weights[l], model.biases[l], act, next);
        if (l + 1 < n_layers)
            for (double& v : next) v = std::max(0.0, v);
        act.swap(next);
    }
    return act;
}

double mc_dropout_score(const ToyModel& model, std::span<const double> input,
                        double rate, int runs, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0))
        throw InvalidParameterError("dropout rate must be in [0, 1)");
    if (runs < 2) throw InvalidParameterError("mc-dropout needs >= 2 runs");
    if (rate == 0.0) return 0.0; // every run is the dry pass

    DropoutMaskSource masks = [&](int run, int layer, std::span<std::uint8_t> keep) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(run) * 1024 +
                                      static_cast<std::uint64_t>(layer)));
        for (auto& k : keep) k = rng.bernoulli(1.0 - rate) ? 1 : 0;
    };

    double sum = 0.0, sum_sq = 0.0;
    for (int run = 0; run < runs; ++run) {
        auto logits = forward_with_dropout(model, input, rate, run, masks);
        auto prob = softmax(logits);
        double top = *std::max_element(prob.begin(), prob.end());
        sum += top;
        sum_sq += top * top;
    }
    const double mean = sum / runs;
    return std::sqrt(std::max(0.0, sum_sq / runs - mean * mean));
}

double ensemble_score(std::span<const ToyModel> models, std::span<const double> input) {
    if (models.size() < 2)
        throw InvalidParameterError("ensemble needs >= 2 members");
    for (const ToyModel& m : models)
        if (m.layer_sizes.front() != models[0].layer_sizes.front() ||
            m.layer_sizes.back() != models[0].layer_sizes.back())
            throw ShapeError("ensemble members disagree on input/output shape");

    std::vector<double> tops;
    tops.reserve(models.size());
    for (const ToyModel& m : models) {
        auto prob = softmax(forward_logits(m, input));
        tops.push_back(*std::max_element(prob.begin(), prob.end()));
    }
    bool all_equal = true;
    for (double t : tops) all_equal = all_equal && t == tops.front();
    if (all_equal) return 0.0;

    double sum = 0.0, sum_sq = 0.0;
    for (double t : tops) {
        sum += t;
        sum_sq += t * t;
    }
    const double n = static_cast<double>(tops.size());
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

void save_model(const ToyModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "qipf-toy-mlp";
    j["version"] = 1;
    j["layer_sizes"] = model.layer_sizes;
    j["dropout_rate"] = model.dropout_rate;
    j["seed"] = model.seed;
    j["training"] = {{"epochs", model.trained_epochs},
                     {"learning_rate", model.learning_rate},
                     {"train_accuracy", model.train_accuracy}};
    auto& weights = j["weights"] = nlohmann::json::array();
    for (const Matrix& w : model.weights) weights.push_back(w.storage());
    j["biases"] = model.biases;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

ToyModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        if (j.at("format") != "qipf-toy-mlp")
            throw ParseError(path.string() + ": not a qipf-toy-mlp file");
        ToyModel model;
        model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        model.dropout_rate = j.at("dropout_rate").get<double>();
        model.seed = j.at("seed").get<std::uint64_t>();
        model.trained_epochs = j.at("training").at("epochs").get<int>();
        model.learning_rate = j.at("training").at("learning_rate").get<double>();
        model.train_accuracy = j.at("training").at("train_accuracy").get<double>();
        model.biases = j.at("biases").get<std::vector<std::vector<double>>>();
        for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
            auto flat = j.at("weights").at(l).get<std::vector<double>>();
            model.weights.emplace_back(
                static_cast<std::size_t>(model.layer_sizes[l]),
                static_cast<std::size_t>(model.layer_sizes[l + 1]), std::move(flat));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace qipf
