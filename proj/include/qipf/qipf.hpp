#pragma once

#include <span>
#include <vector>

#include "qipf/kernel_field.hpp"
#include "qipf/matrix.hpp"

namespace qipf {

// Per-mode energy shifts fixed by a calibration set: each shift makes the
// minimum of its mode over that set exactly zero.
struct Energies {
    double base = 0.0;          // shift for the unprojected ratio
    std::vector<double> modes;  // shift per projected mode, in mode order
    int first_mode = 1;         // lowest projected Hermite order

    int mode_count() const noexcept { return static_cast<int>(modes.size()); }
};

// Decomposition of field queries into the base potential and projected modes.
struct ModeSpectrum {
    std::vector<double> base_qipf;  // per query
    Matrix modes;                   // query x mode, orders first_mode..first_mode+m-1
    Energies energies;
    std::vector<double> score;      // per query: mean over the modes
};

// (sigma^2/2) lap(psi)/psi at the query, psi = sqrt(ipf). Far-field queries
// return the quadratic nearest-point asymptote.
double raw_base_ratio(std::span<const double> query, const KernelField& field);

// Laplacian of psi_p = H*_p(psi) via the chain rule,
//   lap(psi_p) = H*_p''(psi) |grad psi|^2 + H*_p'(psi) lap(psi).
// Far-field queries carry the asymptotic ratio instead.
LaplacianValue mode_laplacian(int p, std::span<const double> query,
                              const KernelField& field);

// (sigma^2/2) lap(psi_p)/psi_p with a signed clamp of the denominator at
// 1e-10; H_p has zeros inside (0, 1], and values near them must stay finite.
double raw_mode_ratio(int p, std::span<const double> query, const KernelField& field);

// Base ratio plus all projected-mode ratios from one pass over the inducing
// set. Orders run first_mode .. first_mode + mode_count - 1.
struct ModeRatios {
    double base = 0.0;
    std::vector<double> modes;
};

ModeRatios raw_ratios(std::span<const double> query, const KernelField& field,
                      int mode_count, int first_mode = 1);

// E = -min(ratio) over the calibration set, for the base and for each mode.
Energies calibrate_energies(const KernelField& field, const Matrix& calibration_set,
                            int mode_count, int first_mode = 1);

// Shifted base potential, shifted modes and per-query mean-of-modes score.
// The energies must have been calibrated against the same field.
ModeSpectrum decompose(const Matrix& queries, const KernelField& field,
                       const Energies& energies);

} // namespace qipf
