#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "qipf/matrix.hpp"

namespace qipf {

// Raw prediction vectors (logits) with true labels. Predicted class and
// correctness are derived from the logits on construction; first argmax wins
// on ties.
struct PredictionSet {
    Matrix logits;                      // n x k
    std::vector<int> labels;            // true labels, in [0, k)
    std::vector<int> predicted;         // argmax per row
    std::vector<std::uint8_t> correct;  // predicted == label

    std::size_t size() const noexcept { return logits.rows(); }
    std::size_t classes() const noexcept { return logits.cols(); }

    // Error indicators (1 = wrong prediction), the detection target.
    std::vector<int> errors() const;

    static PredictionSet from_logits(Matrix logits, std::vector<int> labels);
};

// CSV with header "y0,...,y{k-1},label"; k finite decimal logits plus an
// integer true label per row. Values are written with 17 significant digits
// so a save/load cycle is bit-exact.
PredictionSet load_predictions(const std::filesystem::path& path);
void save_predictions(const PredictionSet& set, const std::filesystem::path& path);

// Uniform sample of target_n rows without replacement; survivors keep their
// original order.
PredictionSet downsample(const PredictionSet& set, std::size_t target_n,
                         std::uint64_t seed);

} // namespace qipf
