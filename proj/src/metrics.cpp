#include "failfoundry/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "failfoundry/errors.hpp"

namespace ff::metrics {

ConfusionMatrix confusion(std::span<const int> labels, std::span<const double> probs,
                          double threshold) {
    if (labels.size() != probs.size()) {
        throw ValueError("confusion: labels and probs length mismatch");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = probs[i] > threshold;
        if (labels[i] == 1) {
            (pred ? cm.tp : cm.fn)++;
        } else {
            (pred ? cm.fp : cm.tn)++;
        }
    }
    return cm;
}

double mcc(const ConfusionMatrix& cm) {
    const double tp = static_cast<double>(cm.tp);
    const double tn = static_cast<double>(cm.tn);
    const double fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn);
    const double f1 = tp + fp, f2 = tp + fn, f3 = tn + fp, f4 = tn + fn;
    if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(f1 * f2 * f3 * f4);
}

RocCurve roc_auc(std::span<const int> labels, std::span<const double> probs) {
    if (labels.size() != probs.size()) {
        throw ValueError("roc_auc: labels and probs length mismatch");
    }
    std::int64_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) {
        throw ValueError("roc_auc: both classes must be present, AUC undefined");
    }
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return probs[a] > probs[b];
    });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    double auc = 0.0;
    std::int64_t tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        // Consume the whole tie group so ties contribute a diagonal segment,
        // which makes the trapezoid equal the Mann-Whitney statistic.
        const double score = probs[order[i]];
        while (i < order.size() && probs[order[i]] == score) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        curve.points.emplace_back(fpr, tpr);
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.auc = auc;
    return curve;
}

ThresholdSweep mcc_sweep(std::span<const int> labels, std::span<const double> probs,
                         double grid_step) {
    if (!(grid_step > 0.0 && grid_step < 1.0)) {
        throw ConfigError("mcc_sweep: grid_step must be in (0,1)");
    }
    ThresholdSweep sweep;
    const auto steps = static_cast<std::size_t>(std::floor(1.0 / grid_step));
    for (std::size_t i = 0; i <= steps; ++i) {
        sweep.thresholds.push_back(static_cast<double>(i) * grid_step);
    }
    if (sweep.thresholds.back() < 1.0) sweep.thresholds.push_back(1.0);
    sweep.mcc_values.reserve(sweep.thresholds.size());
    sweep.best_mcc = -2.0;
    for (double t : sweep.thresholds) {
        const double v = mcc(confusion(labels, probs, t));
        sweep.mcc_values.push_back(v);
        if (v > sweep.best_mcc) {
            sweep.best_mcc = v;
            sweep.best_threshold = t;
        }
    }
    return sweep;
}

double log_loss(std::span<const int> labels, std::span<const double> probs) {
    if (labels.size() != probs.size()) {
        throw ValueError("log_loss: labels and probs length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = std::clamp(probs[i], 1e-300, 1.0 - 1e-16);
        total += labels[i] == 1 ? -std::log(p) : -std::log1p(-p);
    }
    return total / static_cast<double>(labels.size());
}

}  // namespace ff::metrics
