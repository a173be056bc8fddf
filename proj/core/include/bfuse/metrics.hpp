#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bfuse {

// Class convention throughout: 1 = RB (ready-biodegradable, the positive
// class), 0 = NRB.
inline constexpr int kClassRb = 1;
inline constexpr int kClassNrb = 0;

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

// Counts predictions against labels (both as 0/1 class values, RB positive).
// Abstained samples must be excluded by the caller.
ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels);

struct ClassMetrics {
    double sn = 0.0;  // sensitivity  TP / (TP + FN)
    double sp = 0.0;  // specificity  TN / (TN + FP)
    double er = 0.0;  // balanced error rate  1 - (Sn + Sp) / 2
};

// Requires both classes present among the scored samples; otherwise throws
// a ValidationError naming the empty denominator.
ClassMetrics metrics(const ConfusionCounts& counts);

// Decision threshold 0.5; the tie at exactly 0.5 goes to RB.
int classify(double probability);

// Arithmetic mean of member probabilities; every member must have scored.
double ensemble_mean(std::span<const double> member_probabilities);

struct ThresholdDecision {
    bool abstained = false;
    int predicted = kClassNrb;       // valid only when !abstained
    double class_probability = 0.0;  // max(p, 1-p)
};

// Abstention rule: a sample's class probability is max(p, 1-p); it abstains
// when that is below tau. Returns the decisions and the coverage (retained
// fraction). tau must lie in [0.5, 1].
std::pair<std::vector<ThresholdDecision>, double> threshold_filter(
    std::span<const double> probabilities, double tau);

struct PerSampleOutcome {
    std::string id;
    double probability = 0.0;
    int predicted = kClassNrb;
    bool abstained = false;
    int label = -1;
};

struct EvalReport {
    ConfusionCounts counts;  // over scored (non-abstained) samples
    double sn = 0.0;
    double sp = 0.0;
    double er = 0.0;
    double coverage = 1.0;
    std::optional<double> tau;
    std::vector<PerSampleOutcome> per_sample;
};

// Full evaluation of one probability vector against labels, with optional
// abstention threshold. Metrics are computed over retained samples only.
EvalReport evaluate_probabilities(std::span<const double> probabilities,
                                  std::span<const std::string> ids,
                                  std::span<const int> labels, std::optional<double> tau);

}  // namespace bfuse
