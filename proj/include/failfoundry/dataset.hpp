#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ff {

enum class ColumnType { Numeric, Categorical, Date };

struct Column {
    std::string name;
    ColumnType type = ColumnType::Numeric;
    // Categorical only: cell values index into this table. Interned in
    // first-appearance order on load; one_hot sorts lexicographically.
    std::vector<std::string> levels;
};

// Column-typed tabular data. Cells are doubles with NaN encoding NA;
// the missingness mask is derived, never stored twice.
struct Dataset {
    std::vector<std::int64_t> ids;
    std::vector<Column> columns;
    std::vector<double> values;  // row-major, n_rows * n_cols, NaN = NA
    std::optional<std::vector<int>> labels;  // 0/1 per row when present

    std::size_t n_rows() const { return ids.size(); }
    std::size_t n_cols() const { return columns.size(); }

    double at(std::size_t i, std::size_t j) const { return values[i * columns.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * columns.size() + j]; }
    bool is_na(std::size_t i, std::size_t j) const;

    int find_column(const std::string& name) const;
    // Throws ValueError when sizes disagree, ids repeat, or labels are not 0/1.
    void check_invariants() const;
    // Row-subset copy preserving column metadata and label presence.
    Dataset take_rows(const std::vector<std::size_t>& row_indices) const;
};

// 1 where a measurement exists, 0 where NA. Same shape as Dataset values.
struct MissingMask {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> mask;  // stored as doubles so k-means consumes it directly

    double at(std::size_t i, std::size_t j) const { return mask[i * n_cols + j]; }
};

MissingMask missing_mask(const Dataset& d);

struct SplitSpec {
    double validation_fraction = 0.25;
    std::uint64_t seed = 0;
};

// Schema: ordered column tags for load_csv. At most one id and one label
// column; everything else is a feature.
struct SchemaEntry {
    std::string column;
    std::string tag;  // "id" | "label" | "numeric" | "categorical" | "date"
};
struct Schema {
    std::vector<SchemaEntry> entries;
    const SchemaEntry* find(const std::string& column) const;
};

Schema load_schema(const std::string& path);
void save_schema(const Dataset& d, const std::string& path);

// Empty fields and the literal "NA" read as missing. Errors name the
// offending line.
Dataset load_csv(const std::string& path, const Schema& schema);
void save_csv(const Dataset& d, const std::string& path);

// Per row: max non-NA date minus min non-NA date; NaN when every named date
// column is NA in that row. The named columns must be Date-tagged.
std::vector<double> time_on_line(const Dataset& d,
                                 const std::vector<std::string>& date_columns);
// Convenience: appends the computed column under `name`.
Dataset add_time_on_line(const Dataset& d, const std::vector<std::string>& date_columns,
                         const std::string& name = "time_on_line");

// Each observed level of each named Categorical column becomes a 0/1 Numeric
// column "<col>=<level>", inserted where the original column was. NA rows get
// all-zero indicators.
Dataset one_hot(const Dataset& d, const std::vector<std::string>& cat_columns);
std::vector<std::string> categorical_column_names(const Dataset& d);
std::vector<std::string> date_column_names(const Dataset& d);

// Keeps every positive row; samples floor(ratio * n_pos) negatives without
// replacement (capped at the available count) via a partial Fisher-Yates
// shuffle. Row order of the original dataset is preserved.
Dataset undersample(const Dataset& d, double ratio, std::uint64_t seed);

// Stratified train/validation split; both parts keep label presence.
std::pair<Dataset, Dataset> train_validation_split(const Dataset& d, const SplitSpec& spec);

// Synthetic stand-in for a production-line dataset: standard normal features,
// Bernoulli(logistic(b0 + b.x)) labels computed before masking, and per
// part-type missingness blocks (disjoint feature ranges observed per type).
struct SyntheticSpec {
    std::size_t n_rows = 1000;
    std::size_t n_features = 10;
    double positive_rate = 0.1;          // sets the intercept, logit(rate)
    std::vector<double> coefficients;    // planted betas, front-aligned
    std::size_t n_part_types = 1;        // 1 = no missingness
    double mask_noise = 0.0;             // probability of flipping a mask bit
    std::uint64_t seed = 0;
};

Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace ff
