#include "bfuse/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "bfuse/errors.hpp"
#include "bfuse/rng.hpp"

namespace bfuse {

std::vector<std::string> SplitPlan::fold_ids(int fold) const {
    std::vector<std::string> out;
    for (const auto& [id, f] : fold_of) {
        if (f == fold) out.push_back(id);
    }
    return out;
}

std::vector<std::string> SplitPlan::ids_outside_fold(int fold) const {
    std::vector<std::string> out;
    for (const auto& [id, f] : fold_of) {
        if (f != fold) out.push_back(id);
    }
    return out;
}

std::vector<std::string> SplitPlan::partition_ids(const std::string& partition) const {
    std::vector<std::string> out;
    for (const auto& [id, p] : partition_of) {
        if (p == partition) out.push_back(id);
    }
    return out;
}

SplitPlan kfold_split(std::span<const std::string> ids, int k, std::uint64_t seed) {
    const std::size_t n = ids.size();
    if (k < 1) throw ValidationError("k-fold split needs k >= 1");
    if (static_cast<std::size_t>(k) > n) {
        throw ValidationError("k-fold split needs k <= sample count, got k=" +
                              std::to_string(k) + " for " + std::to_string(n) + " samples");
    }
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != n) throw ValidationError("k-fold split: duplicate sample ids");

    std::vector<std::string> shuffled(ids.begin(), ids.end());
    Rng rng(seed);
    rng.shuffle(shuffled);

    SplitPlan plan;
    plan.mode = SplitMode::KFold;
    plan.seed = seed;
    plan.k = k;
    // First n % k folds take one extra sample; sizes differ by at most 1.
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t take = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < take; ++i) {
            plan.fold_of[shuffled[pos++]] = f;
        }
    }
    return plan;
}

SplitPlan remix_split(std::span<const std::string> train_ids,
                      std::span<const std::string> test_ids, double fraction,
                      std::uint64_t seed, const std::map<std::string, std::string>& tags) {
    std::set<std::string> train_set(train_ids.begin(), train_ids.end());
    std::set<std::string> test_set(test_ids.begin(), test_ids.end());
    if (train_set.size() != train_ids.size() || test_set.size() != test_ids.size()) {
        throw ValidationError("remix split: duplicate ids within a pool");
    }
    for (const auto& id : test_set) {
        if (train_set.count(id)) {
            throw ValidationError("remix split: id appears in both pools: " + id);
        }
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ValidationError("remix split fraction must be in (0,1), got " +
                              std::to_string(fraction));
    }

    std::vector<std::string> pooled(train_ids.begin(), train_ids.end());
    pooled.insert(pooled.end(), test_ids.begin(), test_ids.end());
    const std::size_t n = pooled.size();
    if (n == 0) throw ValidationError("remix split: no samples");

    const auto new_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (new_test == 0) throw ValidationError("remix split: fraction yields an empty test set");
    if (new_test >= n) throw ValidationError("remix split: fraction yields an empty train set");

    Rng rng(seed);
    rng.shuffle(pooled);

    SplitPlan plan;
    plan.mode = SplitMode::Remix;
    plan.seed = seed;
    plan.fraction = fraction;
    for (std::size_t i = 0; i < n; ++i) {
        plan.partition_of[pooled[i]] = i < new_test ? "test" : "train";
    }
    for (const auto& id : train_ids) {
        auto it = tags.find(id);
        plan.source_tag[id] = it != tags.end() ? it->second : "train_pool";
    }
    for (const auto& id : test_ids) {
        auto it = tags.find(id);
        plan.source_tag[id] = it != tags.end() ? it->second : "test_pool";
    }
    return plan;
}

std::string split_plan_to_json(const SplitPlan& plan) {
    nlohmann::json j;
    j["mode"] = plan.mode == SplitMode::KFold ? "kfold" : "remix";
    j["seed"] = plan.seed;
    if (plan.mode == SplitMode::KFold) {
        j["k"] = plan.k;
        j["fold_of"] = plan.fold_of;
    } else {
        j["fraction"] = plan.fraction;
        j["partition_of"] = plan.partition_of;
    }
    if (!plan.source_tag.empty()) j["source_tag"] = plan.source_tag;
    return j.dump(2);
}

SplitPlan split_plan_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("split plan is not valid JSON: ") + e.what());
    }
    SplitPlan plan;
    const std::string mode = j.at("mode").get<std::string>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    if (mode == "kfold") {
        plan.mode = SplitMode::KFold;
        plan.k = j.at("k").get<int>();
        plan.fold_of = j.at("fold_of").get<std::map<std::string, int>>();
    } else if (mode == "remix") {
        plan.mode = SplitMode::Remix;
        plan.fraction = j.at("fraction").get<double>();
        plan.partition_of = j.at("partition_of").get<std::map<std::string, std::string>>();
    } else {
        throw ValidationError("unknown split mode: " + mode);
    }
    if (j.contains("source_tag")) {
        plan.source_tag = j.at("source_tag").get<std::map<std::string, std::string>>();
    }
    return plan;
}

void save_split_plan(const std::string& path, const SplitPlan& plan) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write split plan: " + path);
    out << split_plan_to_json(plan) << "\n";
}

SplitPlan load_split_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split plan: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return split_plan_from_json(text);
}

}  // namespace bfuse
