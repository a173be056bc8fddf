#include "bfuse/loss.hpp"

#include <algorithm>
#include <cmath>

#include "bfuse/errors.hpp"

namespace bfuse {

double clamp_probability(double p) {
    return std::clamp(p, kBceClamp, 1.0 - kBceClamp);
}

double binary_cross_entropy(double prediction, int label) {
    if (label != 0 && label != 1) {
        throw ValidationError("binary cross-entropy label must be 0 or 1, got " +
                              std::to_string(label));
    }
    const double p = clamp_probability(prediction);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double mean_bce(const Tensor& probs, std::span<const int> labels) {
    if (probs.size() != labels.size()) {
        throw ValidationError("probability/label count mismatch in BCE");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        total += binary_cross_entropy(probs[i], labels[i]);
    }
    return total / static_cast<double>(labels.size());
}

Tensor mean_bce_grad(const Tensor& probs, std::span<const int> labels) {
    if (probs.size() != labels.size()) {
        throw ValidationError("probability/label count mismatch in BCE gradient");
    }
    const double inv_n = 1.0 / static_cast<double>(labels.size());
    Tensor grad(probs.shape());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = clamp_probability(probs[i]);
        grad[i] = (labels[i] == 1 ? -1.0 / p : 1.0 / (1.0 - p)) * inv_n;
    }
    return grad;
}

double mean_mse(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw ValidationError("MSE shape mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        total += d * d;
    }
    return total / static_cast<double>(pred.size());
}

Tensor mean_mse_grad(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw ValidationError("MSE shape mismatch");
    const double scale = 2.0 / static_cast<double>(pred.size());
    Tensor grad(pred.shape());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        grad[i] = scale * (pred[i] - target[i]);
    }
    return grad;
}

}  // namespace bfuse
