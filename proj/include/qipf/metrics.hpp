#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qipf {

// Mann-Whitney ROC area: P(score_error > score_correct) + half credit for
// ties. errors holds {0,1}, 1 marking a prediction error.
double roc_auc(std::span<const double> scores, std::span<const int> errors);

// Average precision over the descending-score sweep; tied scores are
// processed as one block.
double pr_auc(std::span<const double> scores, std::span<const int> errors);

// (M1 - M0)/s_n * sqrt(p q); identical to Pearson correlation against the
// 0/1 error indicator.
double point_biserial(std::span<const double> scores, std::span<const int> errors);

struct Curve {
    std::vector<double> x; // ROC: FPR, PR: recall
    std::vector<double> y; // ROC: TPR, PR: precision
};

Curve roc_curve(std::span<const double> scores, std::span<const int> errors);
Curve pr_curve(std::span<const double> scores, std::span<const int> errors);

// Shared right-open bins over [min, max] of all scores, last bin closed;
// one count vector per class (correct / wrong).
struct ScoreHistogram {
    std::vector<double> edges;              // bins+1 edges
    std::vector<std::size_t> correct_counts;
    std::vector<std::size_t> wrong_counts;
};

ScoreHistogram histogram(std::span<const double> scores, std::span<const int> errors,
                         int bins);

struct EvalReport {
    double roc_auc = 0.0;
    double pr_auc = 0.0;
    double point_biserial = 0.0;
    Curve roc;
    Curve pr;
    ScoreHistogram hist;
    // metadata
    std::string method;
    std::string corruption;
    int severity = 0;
    std::uint64_t seed = 0;
};

EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> errors,
                           int bins = 20);

nlohmann::json to_json(const EvalReport& report);

} // namespace qipf
