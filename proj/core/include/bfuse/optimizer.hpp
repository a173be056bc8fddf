#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "bfuse/graph.hpp"
#include "bfuse/tensor.hpp"

namespace bfuse {

struct OptimizerConfig {
    double learning_rate = 1e-3;
    double rho = 0.9;
    double epsilon = 1e-8;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;

    void validate() const;
};

// Per-parameter moving averages of squared gradients, zero at start.
struct RmspropState {
    std::map<std::string, Tensor> accumulators;
};

// One RMSprop update:
//   acc' = rho * acc + (1 - rho) * g^2
//   p'   = p - lr * g / (sqrt(acc') + eps)
// Gradient names must be a subset of the trainable parameter names. A
// non-finite gradient aborts the step with parameters and state unchanged.
void rmsprop_step(ModelGraph& model, const std::map<std::string, Tensor>& gradients,
                  RmspropState& state, const OptimizerConfig& config);

}  // namespace bfuse
