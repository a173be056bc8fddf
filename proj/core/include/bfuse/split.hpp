#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bfuse {

enum class SplitMode { KFold, Remix };

// Assignment of every sample id to a fold (k-fold mode) or to the train/test
// partition (remix mode). Assignments are a pure function of (ids, mode,
// seed).
struct SplitPlan {
    SplitMode mode = SplitMode::KFold;
    std::uint64_t seed = 0;
    int k = 0;              // k-fold only
    double fraction = 0.0;  // remix only

    std::map<std::string, int> fold_of;                 // k-fold
    std::map<std::string, std::string> partition_of;    // remix: "train" | "test"
    std::map<std::string, std::string> source_tag;

    // Ids assigned to / excluded from a fold, in deterministic (sorted) order.
    std::vector<std::string> fold_ids(int fold) const;
    std::vector<std::string> ids_outside_fold(int fold) const;
    std::vector<std::string> partition_ids(const std::string& partition) const;
};

// Shuffles ids by seed and deals them into k folds whose sizes differ by at
// most one. Requires 1 <= k <= n and unique ids.
SplitPlan kfold_split(std::span<const std::string> ids, int k, std::uint64_t seed);

// Pools two disjoint id sets, shuffles by seed, and re-partitions
// round(fraction * n) ids as the new test set. Source tags are preserved in
// the plan (defaulting to the originating pool) so both splits can be checked
// for source coverage.
SplitPlan remix_split(std::span<const std::string> train_ids,
                      std::span<const std::string> test_ids, double fraction,
                      std::uint64_t seed,
                      const std::map<std::string, std::string>& tags = {});

// JSON serialization of a plan (the run directory's split file).
std::string split_plan_to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const std::string& text);
void save_split_plan(const std::string& path, const SplitPlan& plan);
SplitPlan load_split_plan(const std::string& path);

}  // namespace bfuse
