#include "qipf/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qipf/errors.hpp"
#include "qipf/kernel_field.hpp"
#include "qipf/metrics.hpp"
#include "qipf/qipf.hpp"
#include "qipf/rng.hpp"

namespace qipf {

double silverman(const Matrix& points) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    if (n < 2) throw InvalidParameterError("silverman needs at least 2 points");

    double std_sum = 0.0;
    bool any_variance = false;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += points(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = points(i, j) - mean;
            ss += dev * dev;
        }
        const double var = ss / static_cast<double>(n - 1);
        if (var > 0.0) any_variance = true;
        std_sum += std::sqrt(var);
    }
    if (!any_variance)
        throw DegenerateDataError("all points identical; bandwidth undefined");

    const double mean_std = std_sum / static_cast<double>(d);
    const double dd = static_cast<double>(d);
    return mean_std * std::pow(4.0 / ((dd + 2.0) * static_cast<double>(n)),
                               1.0 / (dd + 4.0));
}

FactorSelection cross_validate_factor(const PredictionSet& train,
                                      const BandwidthConfig& config) {
    if (config.factor_grid.empty())
        throw InvalidParameterError("factor grid must be non-empty");
    if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0))
        throw InvalidParameterError("validation fraction must be in (0, 1)");
    if (!(config.silverman_sigma > 0.0))
        throw InvalidParameterError("base bandwidth must be positive");
    const std::size_t n = train.size();
    if (n < 2)
        throw InvalidParameterError("cross-validation needs at least 2 rows");

    // Seeded holdout; survivors keep row order inside each part.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(config.seed);
    rng.shuffle(order);
    std::size_t n_val = static_cast<std::size_t>(
        std::round(config.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    std::vector<std::uint8_t> in_val(n, 0);
    for (std::size_t i = 0; i < n_val; ++i) in_val[order[i]] = 1;

    Matrix retained;
    Matrix holdout;
    std::vector<int> holdout_errors;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_val[i]) {
            holdout.push_row(train.logits.row(i));
            holdout_errors.push_back(train.correct[i] ? 0 : 1);
        } else {
            retained.push_row(train.logits.row(i));
        }
    }

    FactorSelection sel;
    const std::size_t n_err = static_cast<std::size_t>(
        std::count(holdout_errors.begin(), holdout_errors.end(), 1));
    if (n_err == 0 || n_err == holdout_errors.size()) {
        // Single-class validation split: the objective is undefined.
        sel.factor = 1.0;
        sel.fallback = true;
        sel.auc_per_factor.assign(config.factor_grid.size(),
                                  std::numeric_limits<double>::quiet_NaN());
        return sel;
    }

    double best_auc = -1.0;
    sel.auc_per_factor.reserve(config.factor_grid.size());
    for (double factor : config.factor_grid) {
        if (!(factor > 0.0))
            throw InvalidParameterError("bandwidth factors must be positive");
        KernelField field(retained, config.silverman_sigma * factor);
        Energies energies =
            calibrate_energies(field, retained, config.modes, config.first_mode);
        ModeSpectrum spec = decompose(holdout, field, energies);
        const double auc = roc_auc(spec.score, holdout_errors);
        sel.auc_per_factor.push_back(auc);
        if (auc > best_auc || (auc == best_auc && factor < sel.factor)) {
            best_auc = auc;
            sel.factor = factor;
        }
    }
    return sel;
}

} // namespace qipf
