#pragma once

// Test-side oracles. Everything here is independent of the library paths it
// checks: plain summation instead of compensated reductions, finite
// differences instead of analytic derivatives, exhaustive enumeration instead
// of sweep algorithms.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qipf/kernel_field.hpp"
#include "qipf/matrix.hpp"
#include "qipf/rng.hpp"

namespace oracles {

// Plain left-to-right mean of kernels in extended precision.
inline double ipf_direct(std::span<const double> query, const qipf::Matrix& points,
                         double sigma) {
    long double sum = 0.0L;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        long double sq = 0.0L;
        auto p = points.row(i);
        for (std::size_t j = 0; j < p.size(); ++j) {
            long double d = static_cast<long double>(query[j]) - p[j];
            sq += d * d;
        }
        sum += std::exp(static_cast<double>(-sq / (2.0L * sigma * sigma)));
    }
    return static_cast<double>(sum / points.rows());
}

// Central finite-difference gradient of a scalar field.
inline std::vector<double> fd_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step) {
    std::vector<double> grad(x.size());
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
        probe[j] = x[j] + step;
        const double hi = f(probe);
        probe[j] = x[j] - step;
        const double lo = f(probe);
        probe[j] = x[j];
        grad[j] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

// Central finite-difference Laplacian of a scalar field.
inline double fd_laplacian(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> x, double step) {
    const double center = f(x);
    std::vector<double> probe(x.begin(), x.end());
    double lap = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        probe[j] = x[j] + step;
        const double hi = f(probe);
        probe[j] = x[j] - step;
        const double lo = f(probe);
        probe[j] = x[j];
        lap += (hi - 2.0 * center + lo) / (step * step);
    }
    return lap;
}

// Physicists' Hermite polynomial from exact integer coefficients (orders up
// to 10 stay well inside 64-bit range).
inline double hermite_exact(int p, double x) {
    std::vector<std::int64_t> prev{1};     // H_0
    if (p == 0) return 1.0;
    std::vector<std::int64_t> cur{0, 2};   // H_1
    for (int k = 1; k < p; ++k) {
        std::vector<std::int64_t> next(cur.size() + 1, 0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += 2 * cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= 2 * k * prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    long double acc = 0.0L;
    long double xp = 1.0L;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        acc += static_cast<long double>(cur[i]) * xp;
        xp *= x;
    }
    return static_cast<double>(acc);
}

// Brute-force pairwise Mann-Whitney statistic with half credit for ties.
inline double roc_auc_pairwise(std::span<const double> scores,
                               std::span<const int> errors) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (errors[i] == 0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (errors[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Average precision by explicit threshold enumeration: every distinct score
// is a threshold; predictions >= threshold are flagged.
inline double pr_auc_thresholds(std::span<const double> scores,
                                std::span<const int> errors) {
    std::vector<double> thresholds(scores.begin(), scores.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    double total_pos = 0.0;
    for (int e : errors) total_pos += e != 0 ? 1.0 : 0.0;

    double prev_recall = 0.0;
    double ap = 0.0;
    for (double t : thresholds) {
        double tp = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) (errors[i] != 0 ? tp : fp) += 1.0;
        }
        const double recall = tp / total_pos;
        const double precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

// Pearson correlation of scores against the 0/1 error indicator.
inline double pearson_01(std::span<const double> scores, std::span<const int> errors) {
    const double n = static_cast<double>(scores.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        sx += scores[i];
        sy += errors[i];
    }
    const double mx = sx / n, my = sy / n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double dx = scores[i] - mx;
        const double dy = errors[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    return cov / std::sqrt(vx * vy);
}

// Spearman rank correlation with midranks.
inline double spearman(std::span<const double> a, std::span<const double> b) {
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> order(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
            const double mid = 0.5 * (i + 1 + j);
            for (std::size_t t = i; t < j; ++t) r[order[t]] = mid;
            i = j;
        }
        return r;
    };
    auto ra = ranks(a), rb = ranks(b);
    std::vector<int> dummy; // reuse pearson via doubles
    const double n = static_cast<double>(ra.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

// Random field + query generator shared by the derivative and invariance
// suites.
struct RandomField {
    qipf::Matrix points;
    double sigma = 0.0;
    std::vector<double> query;
};

inline RandomField random_field(qipf::Rng& rng, std::size_t dim,
                                std::size_t min_points = 3,
                                std::size_t max_points = 40) {
    RandomField rf;
    const std::size_t n =
        min_points + static_cast<std::size_t>(rng.below(max_points - min_points + 1));
    rf.points = qipf::Matrix(n, dim);
    for (double& v : rf.points.storage()) v = rng.uniform(-2.0, 2.0);
    rf.sigma = rng.uniform(0.3, 1.5);
    rf.query.resize(dim);
    for (double& v : rf.query) v = rng.uniform(-2.5, 2.5);
    return rf;
}

} // namespace oracles
