#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qipf/matrix.hpp"

namespace qipf {

struct Dataset {
    Matrix features;          // n x d_in
    std::vector<int> labels;  // in [0, classes)
    int classes = 0;
    std::uint64_t seed = 0;
    std::string generator;

    std::size_t size() const noexcept { return features.rows(); }
};

// k Gaussian blobs with class centers spaced on a circle of radius 2.
Dataset make_blobs(std::size_t n, int k, double spread, std::uint64_t seed);

// Two interleaved half-moons with additive Gaussian noise.
Dataset make_moons(std::size_t n, double noise, std::uint64_t seed);

// Disjoint train/test split; row order within each split follows the source.
std::pair<Dataset, Dataset> split_train_test(const Dataset& data,
                                             double test_fraction,
                                             std::uint64_t seed);

enum class CorruptionKind { rotation, shear, zoom, brightness };

CorruptionKind corruption_kind_from_string(const std::string& name);
std::string to_string(CorruptionKind kind);

// Severity 0..5; level 0 is the identity for every kind.
struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::rotation;
    int severity = 0;
};

inline constexpr int kCorruptionLevels = 6;

// Severity -> transform parameter (degrees, shear coefficient, scale factor,
// additive offset). Fixed tables; see README for values.
double corruption_parameter(CorruptionKind kind, int severity);

// Affine feature transforms behind the severity tables. Rotation and shear
// act on the first two coordinates; zoom and brightness on all of them.
Matrix rotate2d(const Matrix& features, double degrees);
Matrix shear2d(const Matrix& features, double coefficient);
Matrix scale_features(const Matrix& features, double factor);
Matrix offset_features(const Matrix& features, double offset);

Matrix corrupt(const Matrix& features, const CorruptionSpec& spec);

// Versioned JSON round trip for datasets (features, labels, metadata).
void save_dataset(const Dataset& train, const Dataset& test,
                  const std::filesystem::path& path);
std::pair<Dataset, Dataset> load_dataset(const std::filesystem::path& path);

} // namespace qipf
