#include "bfuse/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "bfuse/errors.hpp"

namespace bfuse {

namespace {

constexpr double kConstantStddev = 1e-12;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.emplace_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

DescriptorTable::DescriptorTable(std::vector<std::string> sample_ids,
                                 std::vector<std::string> feature_names,
                                 std::vector<double> values,
                                 std::vector<std::uint8_t> missing)
    : sample_ids_(std::move(sample_ids)),
      feature_names_(std::move(feature_names)),
      values_(std::move(values)),
      missing_(std::move(missing)) {
    if (values_.size() != sample_ids_.size() * feature_names_.size()) {
        throw ValidationError("descriptor matrix size does not match ids x features");
    }
    if (!missing_.empty() && missing_.size() != values_.size()) {
        throw ValidationError("descriptor missingness mask size mismatch");
    }
    std::set<std::string> seen_ids(sample_ids_.begin(), sample_ids_.end());
    if (seen_ids.size() != sample_ids_.size()) {
        throw ValidationError("duplicate sample ids in descriptor table");
    }
    std::set<std::string> seen_names(feature_names_.begin(), feature_names_.end());
    if (seen_names.size() != feature_names_.size()) {
        throw ValidationError("duplicate feature names in descriptor table");
    }
}

bool DescriptorTable::has_missing() const {
    for (std::uint8_t m : missing_) {
        if (m) return true;
    }
    return false;
}

long DescriptorTable::feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < feature_names_.size(); ++j) {
        if (feature_names_[j] == name) return static_cast<long>(j);
    }
    return -1;
}

Tensor DescriptorTable::as_tensor() const {
    if (has_missing()) {
        throw ValidationError("descriptor table still has missing values; impute first");
    }
    if (n_samples() == 0 || n_features() == 0) {
        throw ValidationError("descriptor table is empty");
    }
    return Tensor({n_samples(), n_features()}, values_);
}

DescriptorTable load_descriptor_table(std::string_view csv) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= csv.size(); ++i) {
        if (i == csv.size() || csv[i] == '\n') {
            std::string_view line = csv.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!trim(line).empty()) lines.push_back(line);
            start = i + 1;
        }
    }
    if (lines.empty()) throw ValidationError("descriptor CSV is empty");

    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2) {
        throw ValidationError("descriptor CSV needs an id column and at least one feature");
    }
    std::vector<std::string> feature_names(header.begin() + 1, header.end());
    {
        std::set<std::string> seen;
        for (const auto& name : feature_names) {
            if (name.empty()) throw ValidationError("descriptor CSV has an empty feature name");
            if (!seen.insert(name).second) {
                throw ValidationError("duplicate feature name in CSV header: " + name);
            }
        }
    }

    const std::size_t n_features = feature_names.size();
    std::vector<std::string> ids;
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    std::set<std::string> seen_ids;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != n_features + 1) {
            throw ValidationError("CSV row " + std::to_string(r + 1) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(n_features + 1));
        }
        if (cells[0].empty()) {
            throw ValidationError("CSV row " + std::to_string(r + 1) + " has an empty sample id");
        }
        if (!seen_ids.insert(cells[0]).second) {
            throw ValidationError("duplicate sample id in CSV: " + cells[0]);
        }
        ids.push_back(cells[0]);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            if (cells[j].empty()) {
                values.push_back(0.0);
                missing.push_back(1);
                continue;
            }
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[j], &used);
                if (used != cells[j].size()) throw std::invalid_argument(cells[j]);
                values.push_back(v);
                missing.push_back(0);
            } catch (const std::exception&) {
                throw ValidationError("non-numeric cell at row " + std::to_string(r + 1) +
                                      ", column " + feature_names[j - 1] + ": '" + cells[j] +
                                      "'");
            }
        }
    }
    return DescriptorTable(std::move(ids), std::move(feature_names), std::move(values),
                           std::move(missing));
}

std::pair<DescriptorTable, ImputeStats> impute_missing(const DescriptorTable& table) {
    ImputeStats stats;
    stats.feature_names = table.feature_names();
    stats.medians.resize(table.n_features());
    for (std::size_t j = 0; j < table.n_features(); ++j) {
        std::vector<double> present;
        present.reserve(table.n_samples());
        for (std::size_t i = 0; i < table.n_samples(); ++i) {
            if (!table.is_missing(i, j)) present.push_back(table.value(i, j));
        }
        if (present.empty()) {
            throw ValidationError("feature missing in every training row: " +
                                  table.feature_names()[j]);
        }
        stats.medians[j] = median_of(std::move(present));
    }
    return {impute_with(table, stats), stats};
}

DescriptorTable impute_with(const DescriptorTable& table, const ImputeStats& stats) {
    if (stats.feature_names != table.feature_names()) {
        throw ValidationError("imputation stats feature names do not match the table");
    }
    std::vector<double> values(table.values());
    for (std::size_t i = 0; i < table.n_samples(); ++i) {
        for (std::size_t j = 0; j < table.n_features(); ++j) {
            if (table.is_missing(i, j)) {
                values[i * table.n_features() + j] = stats.medians[j];
            }
        }
    }
    return DescriptorTable(table.sample_ids(), table.feature_names(), std::move(values));
}

std::pair<DescriptorTable, StandardizeStats> standardize(const DescriptorTable& table) {
    if (table.has_missing()) {
        throw ValidationError("cannot standardize a table with missing values; impute first");
    }
    if (table.n_samples() == 0) throw ValidationError("cannot standardize an empty table");

    StandardizeStats stats;
    const double inv_n = 1.0 / static_cast<double>(table.n_samples());
    for (std::size_t j = 0; j < table.n_features(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < table.n_samples(); ++i) mean += table.value(i, j);
        mean *= inv_n;
        double var = 0.0;
        for (std::size_t i = 0; i < table.n_samples(); ++i) {
            const double d = table.value(i, j) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var * inv_n);
        if (sd < kConstantStddev) {
            stats.dropped.push_back(table.feature_names()[j]);
        } else {
            stats.feature_names.push_back(table.feature_names()[j]);
            stats.mean.push_back(mean);
            stats.stddev.push_back(sd);
        }
    }
    if (stats.feature_names.empty()) {
        throw ValidationError("every feature is constant; nothing left after standardization");
    }
    return {standardize_with(table, stats), stats};
}

DescriptorTable standardize_with(const DescriptorTable& table, const StandardizeStats& stats) {
    if (table.has_missing()) {
        throw ValidationError("cannot standardize a table with missing values; impute first");
    }
    // The table must carry exactly the stats' features (retained + dropped).
    std::set<std::string> table_names(table.feature_names().begin(),
                                      table.feature_names().end());
    std::set<std::string> stats_names(stats.feature_names.begin(), stats.feature_names.end());
    for (const auto& d : stats.dropped) stats_names.insert(d);
    if (table_names != stats_names) {
        std::string msg = "standardization stats do not match the table; difference:";
        for (const auto& n : table_names) {
            if (!stats_names.count(n)) msg += " +" + n;
        }
        for (const auto& n : stats_names) {
            if (!table_names.count(n)) msg += " -" + n;
        }
        throw ValidationError(msg);
    }

    const std::size_t out_features = stats.feature_names.size();
    std::vector<double> values(table.n_samples() * out_features);
    for (std::size_t j = 0; j < out_features; ++j) {
        const long src = table.feature_index(stats.feature_names[j]);
        const double inv_sd = 1.0 / stats.stddev[j];
        for (std::size_t i = 0; i < table.n_samples(); ++i) {
            values[i * out_features + j] =
                (table.value(i, static_cast<std::size_t>(src)) - stats.mean[j]) * inv_sd;
        }
    }
    DescriptorTable out(table.sample_ids(), stats.feature_names, std::move(values));
    out.set_standardization(stats);
    return out;
}

DescriptorTable select_features(const DescriptorTable& table,
                                std::span<const std::string> names) {
    if (names.empty()) {
        throw ValidationError("feature selection requires at least one feature name");
    }
    std::vector<std::size_t> cols;
    cols.reserve(names.size());
    for (const auto& name : names) {
        const long j = table.feature_index(name);
        if (j < 0) throw ValidationError("unknown feature name: " + name);
        cols.push_back(static_cast<std::size_t>(j));
    }
    std::vector<double> values(table.n_samples() * cols.size());
    std::vector<std::uint8_t> missing(table.n_samples() * cols.size(), 0);
    bool any_missing = false;
    for (std::size_t i = 0; i < table.n_samples(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            values[i * cols.size() + j] = table.value(i, cols[j]);
            if (table.is_missing(i, cols[j])) {
                missing[i * cols.size() + j] = 1;
                any_missing = true;
            }
        }
    }
    return DescriptorTable(table.sample_ids(),
                           std::vector<std::string>(names.begin(), names.end()),
                           std::move(values),
                           any_missing ? std::move(missing) : std::vector<std::uint8_t>{});
}

DescriptorTable subset_rows(const DescriptorTable& table,
                            std::span<const std::size_t> rows) {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    std::vector<double> values(rows.size() * table.n_features());
    std::vector<std::uint8_t> missing(rows.size() * table.n_features(), 0);
    bool any_missing = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t src = rows[r];
        if (src >= table.n_samples()) throw ValidationError("row index out of range");
        ids.push_back(table.sample_ids()[src]);
        for (std::size_t j = 0; j < table.n_features(); ++j) {
            values[r * table.n_features() + j] = table.value(src, j);
            if (table.is_missing(src, j)) {
                missing[r * table.n_features() + j] = 1;
                any_missing = true;
            }
        }
    }
    return DescriptorTable(std::move(ids), table.feature_names(), std::move(values),
                           any_missing ? std::move(missing) : std::vector<std::uint8_t>{});
}

DescriptorTable align_to_ids(const DescriptorTable& table, std::span<const std::string> ids) {
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (const auto& id : ids) {
        bool found = false;
        for (std::size_t i = 0; i < table.n_samples(); ++i) {
            if (table.sample_ids()[i] == id) {
                rows.push_back(i);
                found = true;
                break;
            }
        }
        if (!found) {
            throw ValidationError("sample id has no descriptor row: " + id);
        }
    }
    return subset_rows(table, rows);
}

DescriptorTable hconcat(const DescriptorTable& left, const DescriptorTable& right) {
    if (left.sample_ids() != right.sample_ids()) {
        throw ValidationError("horizontal concat requires identical sample id order");
    }
    std::vector<std::string> names = left.feature_names();
    names.insert(names.end(), right.feature_names().begin(), right.feature_names().end());
    const std::size_t nf = names.size();
    std::vector<double> values(left.n_samples() * nf);
    std::vector<std::uint8_t> missing(left.n_samples() * nf, 0);
    bool any_missing = false;
    for (std::size_t i = 0; i < left.n_samples(); ++i) {
        for (std::size_t j = 0; j < left.n_features(); ++j) {
            values[i * nf + j] = left.value(i, j);
            if (left.is_missing(i, j)) {
                missing[i * nf + j] = 1;
                any_missing = true;
            }
        }
        for (std::size_t j = 0; j < right.n_features(); ++j) {
            values[i * nf + left.n_features() + j] = right.value(i, j);
            if (right.is_missing(i, j)) {
                missing[i * nf + left.n_features() + j] = 1;
                any_missing = true;
            }
        }
    }
    return DescriptorTable(left.sample_ids(), std::move(names), std::move(values),
                           any_missing ? std::move(missing) : std::vector<std::uint8_t>{});
}

}  // namespace bfuse
