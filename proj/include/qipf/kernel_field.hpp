#pragma once

#include <span>
#include <vector>

#include "qipf/matrix.hpp"

namespace qipf {

// Gaussian field over a fixed inducing set. All evaluations are pure and the
// object is immutable after construction, so a field can be shared freely
// across threads. Reductions over the inducing set run in stored order with
// Kahan compensation, so results do not depend on how callers batch queries.
class KernelField {
public:
    // points: N x d inducing set, sigma: kernel width shared by all dims.
    KernelField(Matrix points, double sigma);

    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dim() const noexcept { return points_.cols(); }
    double sigma() const noexcept { return sigma_; }
    const Matrix& points() const noexcept { return points_; }
    std::span<const double> point(std::size_t i) const { return points_.row(i); }

private:
    Matrix points_;
    double sigma_;
};

// Unnormalized Gaussian exp(-|u|^2 / (2 sigma^2)). The (2 pi sigma^2)^(-d/2)
// factor is dropped: it cancels in every Laplacian ratio downstream and keeps
// field values inside (0, 1].
double gaussian_kernel(std::span<const double> u, double sigma);

// Mean kernel value over the inducing set; the field's density estimate.
double ipf(std::span<const double> query, const KernelField& field);

// sqrt(ipf): the quantity whose Laplacian ratios drive the decomposition.
double wavefunction(std::span<const double> query, const KernelField& field);

// Analytic gradient of ipf at the query.
std::vector<double> ipf_gradient(std::span<const double> query, const KernelField& field);

// Analytic Laplacian of ipf at the query.
double ipf_laplacian(std::span<const double> query, const KernelField& field);

// Queries so far from every inducing point that the field underflows cannot
// produce a meaningful Laplacian ratio; they report the quadratic asymptote
// of the nearest-point Gaussian instead of NaN.
struct LaplacianValue {
    double value = 0.0;           // analytic Laplacian of the wavefunction
    double far_field_ratio = 0.0; // (sigma^2/2) lap(psi)/psi asymptote, set when far_field
    bool far_field = false;
};

// Analytic Laplacian of sqrt(ipf), or the tagged far-field asymptote
// r_min^2/(8 sigma^2) - d/4 once ipf underflows past 1e-300.
LaplacianValue wavefunction_laplacian(std::span<const double> query,
                                      const KernelField& field);

// One sweep over the inducing set collecting everything the mode ratios need.
struct FieldPointEval {
    double ipf = 0.0;
    double psi = 0.0;             // sqrt(ipf)
    std::vector<double> ipf_grad;
    double ipf_lap = 0.0;
    double ipf_grad_sq = 0.0;     // |grad ipf|^2
    double psi_lap = 0.0;         // Laplacian of sqrt(ipf)
    double grad_psi_sq = 0.0;     // |grad sqrt(ipf)|^2
    bool far_field = false;
    double far_field_ratio = 0.0;
};

FieldPointEval evaluate_field(std::span<const double> query, const KernelField& field);

} // namespace qipf
