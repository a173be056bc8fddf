#include "bfuse/grid.hpp"

#include <limits>

#include "bfuse/errors.hpp"

namespace bfuse {

GridOutcome grid_search(std::span<const std::size_t> depth_grid,
                        std::span<const std::size_t> width_grid, int n_folds,
                        const CellRunner& runner) {
    if (depth_grid.empty() || width_grid.empty()) {
        throw ValidationError("grid search needs non-empty depth and width grids");
    }
    if (n_folds < 1) throw ValidationError("grid search needs at least one fold");

    GridOutcome out;
    for (std::size_t depth : depth_grid) {
        for (std::size_t width : width_grid) {
            GridCellResult cell;
            cell.spec = MlpSpec{depth, width};
            cell.spec.validate();
            double er_sum = 0.0;
            for (int fold = 0; fold < n_folds; ++fold) {
                const FoldOutcome fo = runner(cell.spec, fold);
                if (fo.diverged) {
                    ++cell.folds_diverged;
                    continue;
                }
                er_sum += fo.val_er;
                ++cell.folds_completed;
                cell.param_count = fo.param_count;
            }
            cell.mean_val_er = cell.folds_completed > 0
                                   ? er_sum / static_cast<double>(cell.folds_completed)
                                   : std::numeric_limits<double>::quiet_NaN();
            out.cells.push_back(cell);
        }
    }

    const GridCellResult* best = nullptr;
    for (const auto& cell : out.cells) {
        if (cell.folds_completed == 0) continue;
        if (best == nullptr || cell.mean_val_er < best->mean_val_er ||
            (cell.mean_val_er == best->mean_val_er &&
             (cell.param_count < best->param_count ||
              (cell.param_count == best->param_count && cell.spec.depth < best->spec.depth)))) {
            best = &cell;
        }
    }
    if (best == nullptr) {
        throw NumericError("grid search: every cell diverged on every fold");
    }
    out.best = best->spec;
    return out;
}

}  // namespace bfuse
