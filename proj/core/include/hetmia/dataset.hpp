#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hetmia/schema.hpp"

namespace hetmia {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Column-typed table as read from disk, before one-hot expansion and
// standardization. Rows with missing cells in used columns are already
// dropped (and counted).
struct RawTable {
    struct NumericColumn {
        std::string name;
        std::vector<double> values;
    };
    struct CategoricalColumn {
        std::string name;
        std::vector<int> codes;              // index into vocabulary
        std::vector<std::string> vocabulary; // sorted ascending
    };
    using Column = std::variant<NumericColumn, CategoricalColumn>;

    std::vector<Column> columns; // schema order; label/group/drop columns excluded
    std::vector<int> labels;
    std::vector<std::string> class_names;
    std::vector<int> groups;             // empty when the schema has no group column
    std::vector<std::string> group_names;
    std::int64_t dropped_rows = 0;

    std::int64_t rows() const { return static_cast<std::int64_t>(labels.size()); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
};

struct PreprocessOptions {
    // Shift/scale each numeric column to mean 0, variance 1 using population
    // (1/n) statistics of this table only. Constant columns are centered and
    // left unscaled. Off by default: the heterogeneity metric reads raw
    // magnitudes; model training turns it on.
    bool standardize = false;
};

// Preprocessed dataset: real feature matrix, integer labels, optional groups.
struct TabularDataset {
    Matrix features; // n x d
    std::vector<int> labels;
    std::vector<int> groups; // empty, or one group id per row
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names; // size K
    std::vector<std::string> group_names;
    std::int64_t dropped_rows = 0;

    std::int64_t rows() const { return features.rows(); }
    std::int64_t dim() const { return features.cols(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
    bool has_groups() const { return !groups.empty(); }

    void validate() const; // throws data_error when an invariant is broken

    TabularDataset select(std::span<const int> row_indices) const;
    std::vector<int> rows_with_label(int label) const;
    std::vector<int> rows_with_group(int group) const;
    int group_id(const std::string& name) const; // -1 when absent

    // Columnar CSV plus a <csv>.meta.json sidecar (feature names, classes,
    // group vocabulary, dropped-row count).
    void save(const std::filesystem::path& csv_path) const;
    static TabularDataset load(const std::filesystem::path& csv_path);
};

// RFC 4180 CSV with a header row. Missing cells are the empty string or "?".
RawTable read_csv(const std::filesystem::path& path, const Schema& schema);

// One-hot expands categoricals (one column per vocabulary entry, category
// value order) and optionally standardizes numerics. Column order: schema
// order, a categorical occupying one block.
TabularDataset preprocess(const RawTable& raw, const PreprocessOptions& options = {});

TabularDataset load_csv(const std::filesystem::path& path, const Schema& schema,
                        const PreprocessOptions& options = {});

} // namespace hetmia
