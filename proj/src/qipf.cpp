#include "qipf/qipf.hpp"

#include <cmath>
#include <limits>

#include "qipf/errors.hpp"
#include "qipf/hermite.hpp"

namespace qipf {

namespace {

constexpr double kDenominatorFloor = 1e-10;

double guard_denominator(double v) {
    if (std::abs(v) < kDenominatorFloor)
        return v < 0.0 ? -kDenominatorFloor : kDenominatorFloor;
    return v;
}

void check_mode_order(int p) {
    if (p < 1)
        throw InvalidParameterError("projected mode order must be >= 1; "
                                    "order 0 is a constant with a degenerate ratio");
}

double base_ratio_from_eval(const FieldPointEval& e, double sigma) {
    if (e.far_field) return e.far_field_ratio;
    return 0.5 * sigma * sigma * e.psi_lap / e.psi;
}

double mode_ratio_from_eval(const FieldPointEval& e, double sigma, int p) {
    if (e.far_field) return e.far_field_ratio;
    const double psi = e.psi;
    const double grad_psi_sq = e.grad_psi_sq;
    const double lap_mode = hermite_normalized_second_derivative(p, psi) * grad_psi_sq +
                            hermite_normalized_derivative(p, psi) * e.psi_lap;
    const double denom = guard_denominator(hermite_normalized(p, psi));
    return 0.5 * sigma * sigma * lap_mode / denom;
}

} // namespace

double raw_base_ratio(std::span<const double> query, const KernelField& field) {
    return base_ratio_from_eval(evaluate_field(query, field), field.sigma());
}

LaplacianValue mode_laplacian(int p, std::span<const double> query,
                              const KernelField& field) {
    check_mode_order(p);
    FieldPointEval e = evaluate_field(query, field);
    if (e.far_field) return {0.0, e.far_field_ratio, true};
    const double grad_psi_sq = e.grad_psi_sq;
    const double lap = hermite_normalized_second_derivative(p, e.psi) * grad_psi_sq +
                       hermite_normalized_derivative(p, e.psi) * e.psi_lap;
    return {lap, 0.0, false};
}

double raw_mode_ratio(int p, std::span<const double> query, const KernelField& field) {
    check_mode_order(p);
    return mode_ratio_from_eval(evaluate_field(query, field), field.sigma(), p);
}

ModeRatios raw_ratios(std::span<const double> query, const KernelField& field,
                      int mode_count, int first_mode) {
    check_mode_order(first_mode);
    if (mode_count < 1)
        throw InvalidParameterError("mode count must be >= 1");
    FieldPointEval e = evaluate_field(query, field);
    const double sigma = field.sigma();
    ModeRatios out;
    out.base = base_ratio_from_eval(e, sigma);
    out.modes.reserve(static_cast<std::size_t>(mode_count));
    for (int p = first_mode; p < first_mode + mode_count; ++p)
        out.modes.push_back(mode_ratio_from_eval(e, sigma, p));
    return out;
}

Energies calibrate_energies(const KernelField& field, const Matrix& calibration_set,
                            int mode_count, int first_mode) {
    if (calibration_set.empty())
        throw InvalidParameterError("calibration set must be non-empty");
    check_mode_order(first_mode);
    if (mode_count < 1)
        throw InvalidParameterError("mode count must be >= 1");

    double min_base = std::numeric_limits<double>::infinity();
    std::vector<double> min_modes(static_cast<std::size_t>(mode_count),
                                  std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < calibration_set.rows(); ++i) {
        ModeRatios r = raw_ratios(calibration_set.row(i), field, mode_count, first_mode);
        if (r.base < min_base) min_base = r.base;
        for (int j = 0; j < mode_count; ++j)
            if (r.modes[j] < min_modes[j]) min_modes[j] = r.modes[j];
    }

    Energies e;
    e.base = -min_base;
    e.modes.resize(static_cast<std::size_t>(mode_count));
    for (int j = 0; j < mode_count; ++j) e.modes[j] = -min_modes[j];
    e.first_mode = first_mode;
    return e;
}

ModeSpectrum decompose(const Matrix& queries, const KernelField& field,
                       const Energies& energies) {
    const int m = energies.mode_count();
    if (m < 1) throw InvalidParameterError("energies carry no modes");

    ModeSpectrum spec;
    spec.energies = energies;
    spec.base_qipf.resize(queries.rows());
    spec.modes = Matrix(queries.rows(), static_cast<std::size_t>(m));
    spec.score.resize(queries.rows());

    for (std::size_t i = 0; i < queries.rows(); ++i) {
        ModeRatios r = raw_ratios(queries.row(i), field, m, energies.first_mode);
        spec.base_qipf[i] = r.base + energies.base;
        double sum = 0.0;
        for (int j = 0; j < m; ++j) {
            double v = r.modes[j] + energies.modes[j];
            spec.modes(i, static_cast<std::size_t>(j)) = v;
            sum += v;
        }
        spec.score[i] = sum / static_cast<double>(m);
    }
    return spec;
}

} // namespace qipf
