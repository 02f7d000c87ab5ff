#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hetmia {

enum class ColumnKind { numeric, categorical, drop };

struct SchemaColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    // Categorical only. When empty the vocabulary is collected from the full
    // file at load time, before any split, so feature spaces stay aligned
    // across subsets.
    std::vector<std::string> vocabulary;
};

// Declarative rule turning the raw label column into a class index.
struct LabelRule {
    enum class Kind { threshold, categories };
    Kind kind = Kind::threshold;

    // threshold: label column is numeric; class 1 iff value `op` threshold,
    // with op in {">", ">="}.
    std::string op = ">=";
    double threshold = 0.0;

    // categories: class k iff the raw value is listed in classes[k].values.
    struct CategoryClass {
        std::string name;
        std::vector<std::string> values;
    };
    std::vector<CategoryClass> classes;
};

// Column roles and label rule for one CSV layout. Schemas are data: the two
// shipped files (data/students.schema.json, data/heart.schema.json) pin the
// dataset conventions without hard-coding them.
struct Schema {
    std::vector<SchemaColumn> columns;  // feature columns only
    std::string label_column;           // not a feature; must exist in the header
    LabelRule label_rule;
    std::optional<std::string> group_column;
    std::string positive_label_name = "positive";

    void validate() const; // throws config_error
    int num_classes() const;
    std::vector<std::string> class_names() const;

    static Schema from_json(const std::string& text);
    static Schema from_file(const std::filesystem::path& path);
    std::string to_json() const;
};

} // namespace hetmia
