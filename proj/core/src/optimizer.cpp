#include "bfuse/optimizer.hpp"

#include <cmath>

#include "bfuse/errors.hpp"

namespace bfuse {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("rho must be in (0, 1)");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
    if (batch_size == 0) throw ValidationError("batch_size must be positive");
    if (max_epochs == 0) throw ValidationError("max_epochs must be positive");
}

void rmsprop_step(ModelGraph& model, const std::map<std::string, Tensor>& gradients,
                  RmspropState& state, const OptimizerConfig& config) {
    config.validate();
    for (const auto& [name, grad] : gradients) {
        if (!model.has_param(name) || !model.trainable(name)) {
            throw ValidationError("gradient for unknown or frozen parameter: " + name);
        }
        if (!model.param(name).same_shape(grad)) {
            throw StructuralError("gradient shape mismatch for parameter: " + name);
        }
        if (!grad.all_finite()) {
            throw NumericError("non-finite gradient for parameter " + name +
                               "; step aborted, parameters unchanged");
        }
    }
    for (const auto& [name, grad] : gradients) {
        Tensor& p = model.param(name);
        auto [it, inserted] = state.accumulators.try_emplace(name, Tensor(p.shape()));
        Tensor& acc = it->second;
        if (!inserted && !acc.same_shape(p)) {
            throw StructuralError("optimizer state shape mismatch for parameter: " + name);
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double g = grad[i];
            acc[i] = config.rho * acc[i] + (1.0 - config.rho) * g * g;
            p[i] -= config.learning_rate * g / (std::sqrt(acc[i]) + config.epsilon);
        }
    }
}

}  // namespace bfuse
