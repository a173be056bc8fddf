#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bfuse/tensor.hpp"

namespace bfuse {

// Per-feature medians learned on training rows, reused at test time.
struct ImputeStats {
    std::vector<std::string> feature_names;
    std::vector<double> medians;
};

// Per-feature z-score statistics learned on training rows. Constant features
// (stddev < 1e-12) are dropped and recorded here.
struct StandardizeStats {
    std::vector<std::string> feature_names;  // retained features, in order
    std::vector<double> mean;
    std::vector<double> stddev;  // population stddev
    std::vector<std::string> dropped;  // constant features removed
};

// Immutable table of named real-valued features per sample. All operations
// return new tables.
class DescriptorTable {
public:
    DescriptorTable() = default;
    DescriptorTable(std::vector<std::string> sample_ids, std::vector<std::string> feature_names,
                    std::vector<double> values, std::vector<std::uint8_t> missing = {});

    std::size_t n_samples() const { return sample_ids_.size(); }
    std::size_t n_features() const { return feature_names_.size(); }

    const std::vector<std::string>& sample_ids() const { return sample_ids_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<double>& values() const { return values_; }

    double value(std::size_t row, std::size_t col) const {
        return values_[row * n_features() + col];
    }
    bool is_missing(std::size_t row, std::size_t col) const {
        return !missing_.empty() && missing_[row * n_features() + col] != 0;
    }
    bool has_missing() const;

    long feature_index(const std::string& name) const;  // -1 when absent

    const std::optional<StandardizeStats>& standardization() const { return standardization_; }
    void set_standardization(StandardizeStats stats) { standardization_ = std::move(stats); }

    // Row-major matrix as a (n_samples, n_features) tensor; missing cells
    // must have been imputed first.
    Tensor as_tensor() const;

private:
    std::vector<std::string> sample_ids_;
    std::vector<std::string> feature_names_;
    std::vector<double> values_;  // row-major, n_samples x n_features
    std::vector<std::uint8_t> missing_;  // same layout; empty means none
    std::optional<StandardizeStats> standardization_;
};

// CSV with a header row (first column = sample id, remaining columns =
// feature names) and numeric or empty cells. Empty cells become missing
// entries. Duplicate ids/names, ragged rows and non-numeric cells raise a
// load error naming the row/column.
DescriptorTable load_descriptor_table(std::string_view csv);

// Median imputation. Medians are computed from this table's rows (pass the
// training fold); apply the returned stats to validation/test tables.
std::pair<DescriptorTable, ImputeStats> impute_missing(const DescriptorTable& table);
DescriptorTable impute_with(const DescriptorTable& table, const ImputeStats& stats);

// Z-score standardization. Statistics come from this table's rows (pass the
// training fold); constant features are dropped and recorded in the stats.
std::pair<DescriptorTable, StandardizeStats> standardize(const DescriptorTable& table);
// Test-time path: feature names must match the stats exactly (the stats'
// drop list is applied first).
DescriptorTable standardize_with(const DescriptorTable& table, const StandardizeStats& stats);

// Column subset in the requested order; unknown names are an error.
DescriptorTable select_features(const DescriptorTable& table,
                                std::span<const std::string> names);

// Row subset by index, in the requested order.
DescriptorTable subset_rows(const DescriptorTable& table,
                            std::span<const std::size_t> rows);

// Reorders rows to match `ids` exactly; a missing or duplicate id is a hard
// error (no silent reordering).
DescriptorTable align_to_ids(const DescriptorTable& table, std::span<const std::string> ids);

// Horizontal concatenation; sample ids must match row-for-row.
DescriptorTable hconcat(const DescriptorTable& left, const DescriptorTable& right);

}  // namespace bfuse
