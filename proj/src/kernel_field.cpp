#include "qipf/kernel_field.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qipf/errors.hpp"

namespace qipf {

namespace {

// Below this the wavefunction and its derivatives are numerically dead and
// ratio evaluations switch to the nearest-point asymptote.
constexpr double kFarFieldFloor = 1e-300;
const double kLogFarFieldFloor = std::log(kFarFieldFloor);

// Compensated accumulator; summation order is the stored inducing order.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

void check_query(std::span<const double> query, const KernelField& field) {
    if (query.size() != field.dim())
        throw ShapeError("query dimension " + std::to_string(query.size()) +
                         " does not match field dimension " + std::to_string(field.dim()));
}

// Squared distances to every inducing point plus their minimum. Kernel sums
// run on exp(-(sq - sq_min)/(2 sigma^2)), which keeps the ratios needed by
// the decomposition representable far beyond the raw kernel underflow point.
double squared_distances(std::span<const double> query, const KernelField& field,
                         std::vector<double>& sq_out) {
    const std::size_t d = field.dim();
    sq_out.resize(field.size());
    double sq_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < field.size(); ++i) {
        auto p = field.point(i);
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = query[j] - p[j];
            sq += diff * diff;
        }
        sq_out[i] = sq;
        if (sq < sq_min) sq_min = sq;
    }
    return sq_min;
}

} // namespace

KernelField::KernelField(Matrix points, double sigma)
    : points_(std::move(points)), sigma_(sigma) {
    if (!(sigma_ > 0.0))
        throw InvalidParameterError("kernel width must be positive");
    if (points_.rows() == 0)
        throw InvalidParameterError("inducing set must contain at least one point");
}

double gaussian_kernel(std::span<const double> u, double sigma) {
    if (!(sigma > 0.0))
        throw InvalidParameterError("kernel width must be positive");
    double sq = 0.0;
    for (double v : u) sq += v * v;
    return std::exp(-sq / (2.0 * sigma * sigma));
}

double ipf(std::span<const double> query, const KernelField& field) {
    check_query(query, field);
    const double inv2s2 = 0.5 / (field.sigma() * field.sigma());
    std::vector<double> sq;
    const double sq_min = squared_distances(query, field, sq);
    KahanSum acc;
    for (double s : sq) acc.add(std::exp(-(s - sq_min) * inv2s2));
    return std::exp(-sq_min * inv2s2) *
           (acc.sum / static_cast<double>(field.size()));
}

double wavefunction(std::span<const double> query, const KernelField& field) {
    return std::sqrt(ipf(query, field));
}

std::vector<double> ipf_gradient(std::span<const double> query, const KernelField& field) {
    return evaluate_field(query, field).ipf_grad;
}

double ipf_laplacian(std::span<const double> query, const KernelField& field) {
    return evaluate_field(query, field).ipf_lap;
}

LaplacianValue wavefunction_laplacian(std::span<const double> query,
                                      const KernelField& field) {
    FieldPointEval e = evaluate_field(query, field);
    return {e.psi_lap, e.far_field_ratio, e.far_field};
}

FieldPointEval evaluate_field(std::span<const double> query, const KernelField& field) {
    check_query(query, field);
    const std::size_t d = field.dim();
    const std::size_t n = field.size();
    const double sigma = field.sigma();
    const double inv_s2 = 1.0 / (sigma * sigma);
    const double inv2s2 = 0.5 / (sigma * sigma);
    const double inv_s4 = inv_s2 * inv_s2;

    std::vector<double> sq;
    const double sq_min = squared_distances(query, field, sq);

    // Peak-scaled sums: w_i = G_i / G_nearest in (0, 1].
    KahanSum w_acc;     // sum w
    KahanSum lap_acc;   // sum (sq/s^4 - d/s^2) w
    std::vector<KahanSum> grad_acc(d);
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = field.point(i);
        for (std::size_t j = 0; j < d; ++j) diff[j] = query[j] - p[j];
        const double w = std::exp(-(sq[i] - sq_min) * inv2s2);
        w_acc.add(w);
        for (std::size_t j = 0; j < d; ++j) grad_acc[j].add(-diff[j] * inv_s2 * w);
        lap_acc.add((sq[i] * inv_s4 - static_cast<double>(d) * inv_s2) * w);
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    const double peak = std::exp(-sq_min * inv2s2);
    const double log_f = -sq_min * inv2s2 + std::log(w_acc.sum * inv_n);

    FieldPointEval out;
    out.ipf = peak * (w_acc.sum * inv_n);
    out.ipf_grad.resize(d);
    for (std::size_t j = 0; j < d; ++j)
        out.ipf_grad[j] = peak * (grad_acc[j].sum * inv_n);
    out.ipf_lap = peak * (lap_acc.sum * inv_n);
    out.ipf_grad_sq = 0.0;
    for (double v : out.ipf_grad) out.ipf_grad_sq += v * v;

    if (log_f < kLogFarFieldFloor) {
        out.far_field = true;
        out.far_field_ratio =
            sq_min / (8.0 * sigma * sigma) - static_cast<double>(d) / 4.0;
        out.psi = 0.0;
        out.psi_lap = 0.0;
        return out;
    }

    out.psi = std::sqrt(out.ipf);
    // lap(psi)/psi = lap(f)/(2f) - |grad f|^2/(4 f^2); both ratios come from
    // the scaled sums, so they survive even when f, grad f and lap f have
    // underflowed individually.
    const double lap_over_f = lap_acc.sum / w_acc.sum;
    double grad_over_f_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double g = grad_acc[j].sum / w_acc.sum;
        grad_over_f_sq += g * g;
    }
    out.psi_lap = out.psi * (0.5 * lap_over_f - 0.25 * grad_over_f_sq);
    // |grad psi|^2 = (|grad f|^2 / f^2) f / 4; underflow here is harmless,
    // the term it feeds is O(psi) below the Laplacian one.
    out.grad_psi_sq = 0.25 * grad_over_f_sq * out.ipf;
    return out;
}

} // namespace qipf
