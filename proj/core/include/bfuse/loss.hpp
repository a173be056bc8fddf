#pragma once

#include <span>

#include "bfuse/tensor.hpp"

namespace bfuse {

// Clamp bound applied to predictions before the logarithm.
inline constexpr double kBceClamp = 1e-7;

double clamp_probability(double p);

// -[y ln p + (1-y) ln(1-p)] with p clamped to [kBceClamp, 1-kBceClamp].
// Label must be 0 or 1.
double binary_cross_entropy(double prediction, int label);

// Mean BCE over a batch of probabilities shaped (N, 1).
double mean_bce(const Tensor& probs, std::span<const int> labels);

// d(mean BCE)/d(probs), shaped like probs.
Tensor mean_bce_grad(const Tensor& probs, std::span<const int> labels);

// Mean squared error over (N, T) predictions vs targets, and its gradient.
double mean_mse(const Tensor& pred, const Tensor& target);
Tensor mean_mse_grad(const Tensor& pred, const Tensor& target);

}  // namespace bfuse
