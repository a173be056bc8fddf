#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bfuse/models.hpp"

namespace bfuse {

// Result of training one grid cell on one validation fold.
struct FoldOutcome {
    double val_er = 0.0;
    std::size_t param_count = 0;
    bool diverged = false;
};

struct GridCellResult {
    MlpSpec spec;
    double mean_val_er = 0.0;  // over completed folds
    std::size_t param_count = 0;
    std::size_t folds_completed = 0;
    std::size_t folds_diverged = 0;
};

struct GridOutcome {
    std::vector<GridCellResult> cells;  // depth-major, width-minor order
    MlpSpec best;
};

using CellRunner = std::function<FoldOutcome(const MlpSpec&, int fold)>;

// Trains every (depth, width) combination on the same split (`runner` is
// called once per cell per fold) and selects the cell with the minimum mean
// validation error rate. Ties break toward fewer parameters, then lower
// depth. Individual diverged runs are recorded, not fatal; a grid where
// every cell diverged on every fold is an error.
GridOutcome grid_search(std::span<const std::size_t> depth_grid,
                        std::span<const std::size_t> width_grid, int n_folds,
                        const CellRunner& runner);

}  // namespace bfuse
