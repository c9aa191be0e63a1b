#pragma once

#include <cstdint>
#include <vector>

#include "qipf/matrix.hpp"
#include "qipf/predictions.hpp"

namespace qipf {

struct BandwidthConfig {
    double silverman_sigma = 0.0; // base width, from silverman()
    std::vector<double> factor_grid = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    double validation_fraction = 0.2;
    int modes = 4;
    int first_mode = 1;
    std::uint64_t seed = 0;
};

// sigma0 = mean(per-dimension sample std) * (4 / ((d+2) N))^(1/(d+4)).
double silverman(const Matrix& points);

struct FactorSelection {
    double factor = 1.0;
    bool fallback = false;            // validation split had a single class
    std::vector<double> auc_per_factor; // aligned with the config grid; NaN when fallback
};

// Holds out a seeded validation_fraction of the rows, builds a field on the
// retained rows for each candidate factor, scores the held-out rows, and
// returns the factor with the best held-out error-detection ROC-AUC. Ties
// prefer the smaller factor; a single-class validation split falls back to 1.
FactorSelection cross_validate_factor(const PredictionSet& train,
                                      const BandwidthConfig& config);

} // namespace qipf
