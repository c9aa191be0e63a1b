#include "qipf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qipf/errors.hpp"

namespace qipf {

namespace {

struct ClassCounts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

ClassCounts count_classes(std::span<const double> scores, std::span<const int> errors) {
    if (scores.size() != errors.size())
        throw ShapeError("scores and errors differ in length");
    if (scores.empty()) throw UndefinedMetricError("empty input");
    ClassCounts c;
    for (int e : errors) (e != 0 ? c.positives : c.negatives)++;
    return c;
}

// Indices sorted by descending score; ties keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

} // namespace

double roc_auc(std::span<const double> scores, std::span<const int> errors) {
    ClassCounts c = count_classes(scores, errors);
    if (c.positives == 0 || c.negatives == 0)
        throw UndefinedMetricError("roc_auc needs both classes present");

    // Midrank sum over positives; tied blocks share the average rank, which
    // is a half-integer and exact in binary floating point.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t)
            if (errors[order[t]] != 0) rank_sum_pos += midrank;
        i = j;
    }
    const double n1 = static_cast<double>(c.positives);
    const double n0 = static_cast<double>(c.negatives);
    return (rank_sum_pos - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

double pr_auc(std::span<const double> scores, std::span<const int> errors) {
    ClassCounts c = count_classes(scores, errors);
    if (c.positives == 0)
        throw UndefinedMetricError("pr_auc needs at least one error present");

    auto order = descending_order(scores);
    const double total_pos = static_cast<double>(c.positives);
    double tp = 0.0, fp = 0.0;
    double prev_recall = 0.0;
    double ap = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t)
            (errors[order[t]] != 0 ? tp : fp) += 1.0;
        const double recall = tp / total_pos;
        const double precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

double point_biserial(std::span<const double> scores, std::span<const int> errors) {
    ClassCounts c = count_classes(scores, errors);
    if (c.positives == 0 || c.negatives == 0)
        throw UndefinedMetricError("point_biserial needs both classes present");

    const double n = static_cast<double>(scores.size());
    double sum = 0.0, sum1 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        sum += scores[i];
        if (errors[i] != 0) sum1 += scores[i];
    }
    const double mean = sum / n;
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= n;
    if (var <= 0.0)
        throw UndefinedMetricError("point_biserial undefined for constant scores");

    const double p = static_cast<double>(c.positives) / n;
    const double q = 1.0 - p;
    const double m1 = sum1 / static_cast<double>(c.positives);
    const double m0 = (sum - sum1) / static_cast<double>(c.negatives);
    return (m1 - m0) / std::sqrt(var) * std::sqrt(p * q);
}

Curve roc_curve(std::span<const double> scores, std::span<const int> errors) {
    ClassCounts c = count_classes(scores, errors);
    if (c.positives == 0 || c.negatives == 0)
        throw UndefinedMetricError("roc curve needs both classes present");

    auto order = descending_order(scores);
    Curve curve;
    curve.x.push_back(0.0);
    curve.y.push_back(0.0);
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t)
            (errors[order[t]] != 0 ? tp : fp) += 1.0;
        curve.x.push_back(fp / static_cast<double>(c.negatives));
        curve.y.push_back(tp / static_cast<double>(c.positives));
        i = j;
    }
    return curve;
}

Curve pr_curve(std::span<const double> scores, std::span<const int> errors) {
    ClassCounts c = count_classes(scores, errors);
    if (c.positives == 0)
        throw UndefinedMetricError("pr curve needs at least one error present");

    auto order = descending_order(scores);
    Curve curve;
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t)
            (errors[order[t]] != 0 ? tp : fp) += 1.0;
        curve.x.push_back(tp / static_cast<double>(c.positives));
        curve.y.push_back(tp / (tp + fp));
        i = j;
    }
    return curve;
}

ScoreHistogram histogram(std::span<const double> scores, std::span<const int> errors,
                         int bins) {
    if (bins < 1) throw InvalidParameterError("histogram needs bins >= 1");
    if (scores.size() != errors.size())
        throw ShapeError("scores and errors differ in length");
    if (scores.empty()) throw InvalidParameterError("histogram needs data");

    const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it, hi = *hi_it;

    ScoreHistogram h;
    h.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
    h.correct_counts.assign(bins, 0);
    h.wrong_counts.assign(bins, 0);

    const double width = hi - lo;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        int b;
        if (width <= 0.0) {
            b = bins - 1; // all scores identical: last (right-closed) bin
        } else {
            b = static_cast<int>((scores[i] - lo) / width * bins);
            b = std::clamp(b, 0, bins - 1);
        }
        (errors[i] != 0 ? h.wrong_counts : h.correct_counts)[b]++;
    }
    return h;
}

EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> errors,
                           int bins) {
    EvalReport r;
    r.roc_auc = roc_auc(scores, errors);
    r.pr_auc = pr_auc(scores, errors);
    r.point_biserial = point_biserial(scores, errors);
    r.roc = roc_curve(scores, errors);
    r.pr = pr_curve(scores, errors);
    r.hist = histogram(scores, errors, bins);
    return r;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j;
    j["roc_auc"] = report.roc_auc;
    j["pr_auc"] = report.pr_auc;
    j["point_biserial"] = report.point_biserial;
    j["roc_points"] = {{"fpr", report.roc.x}, {"tpr", report.roc.y}};
    j["pr_points"] = {{"recall", report.pr.x}, {"precision", report.pr.y}};
    j["histogram"] = {{"edges", report.hist.edges},
                      {"correct", report.hist.correct_counts},
                      {"wrong", report.hist.wrong_counts}};
    j["metadata"] = {{"method", report.method},
                     {"corruption", report.corruption},
                     {"severity", report.severity},
                     {"seed", report.seed}};
    return j;
}

} // namespace qipf
