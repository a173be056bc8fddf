#include "bfuse/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "bfuse/errors.hpp"

namespace bfuse {

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw ValidationError("prediction/label count mismatch: " +
                              std::to_string(predictions.size()) + " vs " +
                              std::to_string(labels.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int p = predictions[i];
        const int y = labels[i];
        if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
            throw ValidationError("confusion counts need 0/1 classes");
        }
        if (y == kClassRb) {
            p == kClassRb ? ++c.tp : ++c.fn;
        } else {
            p == kClassNrb ? ++c.tn : ++c.fp;
        }
    }
    return c;
}

ClassMetrics metrics(const ConfusionCounts& counts) {
    if (counts.tp + counts.fn == 0) {
        throw ValidationError("sensitivity undefined: no RB samples scored (TP+FN = 0)");
    }
    if (counts.tn + counts.fp == 0) {
        throw ValidationError("specificity undefined: no NRB samples scored (TN+FP = 0)");
    }
    ClassMetrics m;
    m.sn = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
    m.sp = static_cast<double>(counts.tn) / static_cast<double>(counts.tn + counts.fp);
    m.er = 1.0 - (m.sn + m.sp) / 2.0;
    return m;
}

int classify(double probability) {
    return probability >= 0.5 ? kClassRb : kClassNrb;
}

double ensemble_mean(std::span<const double> member_probabilities) {
    if (member_probabilities.empty()) {
        throw ValidationError("ensemble mean over zero members");
    }
    double total = 0.0;
    for (double p : member_probabilities) {
        if (!std::isfinite(p)) throw NumericError("ensemble member produced a non-finite score");
        total += p;
    }
    return total / static_cast<double>(member_probabilities.size());
}

std::pair<std::vector<ThresholdDecision>, double> threshold_filter(
    std::span<const double> probabilities, double tau) {
    if (!(tau >= 0.5 && tau <= 1.0)) {
        throw ValidationError("abstention threshold must lie in [0.5, 1], got " +
                              std::to_string(tau));
    }
    std::vector<ThresholdDecision> decisions(probabilities.size());
    std::size_t retained = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities[i];
        ThresholdDecision& d = decisions[i];
        d.class_probability = std::max(p, 1.0 - p);
        d.abstained = d.class_probability < tau;
        d.predicted = classify(p);
        if (!d.abstained) ++retained;
    }
    const double coverage = probabilities.empty()
                                ? 1.0
                                : static_cast<double>(retained) /
                                      static_cast<double>(probabilities.size());
    return {std::move(decisions), coverage};
}

EvalReport evaluate_probabilities(std::span<const double> probabilities,
                                  std::span<const std::string> ids,
                                  std::span<const int> labels, std::optional<double> tau) {
    if (probabilities.size() != labels.size() || probabilities.size() != ids.size()) {
        throw ValidationError("evaluation inputs have mismatched lengths");
    }
    EvalReport report;
    report.tau = tau;

    std::vector<ThresholdDecision> decisions;
    if (tau.has_value()) {
        auto [d, coverage] = threshold_filter(probabilities, *tau);
        decisions = std::move(d);
        report.coverage = coverage;
    } else {
        decisions.resize(probabilities.size());
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            decisions[i].abstained = false;
            decisions[i].predicted = classify(probabilities[i]);
            decisions[i].class_probability =
                std::max(probabilities[i], 1.0 - probabilities[i]);
        }
        report.coverage = 1.0;
    }

    std::vector<int> scored_preds;
    std::vector<int> scored_labels;
    report.per_sample.reserve(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        PerSampleOutcome out;
        out.id = ids[i];
        out.probability = probabilities[i];
        out.predicted = decisions[i].predicted;
        out.abstained = decisions[i].abstained;
        out.label = labels[i];
        report.per_sample.push_back(std::move(out));
        if (!decisions[i].abstained) {
            scored_preds.push_back(decisions[i].predicted);
            scored_labels.push_back(labels[i]);
        }
    }
    report.counts = confusion(scored_preds, scored_labels);
    const ClassMetrics m = metrics(report.counts);
    report.sn = m.sn;
    report.sp = m.sp;
    report.er = m.er;
    return report;
}

}  // namespace bfuse
