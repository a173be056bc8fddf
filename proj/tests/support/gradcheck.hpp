#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "bfuse/graph.hpp"
#include "bfuse/tensor.hpp"

namespace bfuse::testing {

// Independent gradient oracle: compares backward() against central finite
// differences of a fixed linear functional of the graph output,
//   L(theta) = sum_i c_i * y_i(theta),
// whose exact output gradient is the coefficient tensor c. Dropout masks are
// replayed by reseeding the same rng stream for every forward evaluation.
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::string worst_param;
};

double relative_error(double a, double b);

GradCheckResult check_gradients(ModelGraph& g, const std::map<std::string, Tensor>& inputs,
                                std::uint64_t seed, double h = 1e-4);

}  // namespace bfuse::testing
