#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ff::metrics {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + tn + fp + fn; }
};

// Prediction rule is strictly prob > threshold.
ConfusionMatrix confusion(std::span<const int> labels, std::span<const double> probs,
                          double threshold);

// (TP*TN - FP*FN) / sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN)); 0 when any factor
// of the denominator is 0.
double mcc(const ConfusionMatrix& cm);

struct RocCurve {
    // (false positive rate, true positive rate), sorted by FPR, from (0,0)
    // to (1,1), one point per distinct score.
    std::vector<std::pair<double, double>> points;
    double auc = 0.0;  // trapezoidal integral == Mann-Whitney with ties at 1/2
};

// Requires both classes present.
RocCurve roc_auc(std::span<const int> labels, std::span<const double> probs);

struct ThresholdSweep {
    std::vector<double> thresholds;
    std::vector<double> mcc_values;
    double best_threshold = 0.0;  // smallest argmax
    double best_mcc = 0.0;
};

// Evaluates mcc(confusion(...)) on the grid {0, step, 2*step, ..., 1}.
ThresholdSweep mcc_sweep(std::span<const int> labels, std::span<const double> probs,
                         double grid_step = 0.01);

// Mean logistic loss of probabilities against 0/1 labels.
double log_loss(std::span<const int> labels, std::span<const double> probs);

}  // namespace ff::metrics
