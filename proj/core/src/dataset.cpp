#include "hetmia/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hetmia/errors.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

// RFC 4180: quoted fields may contain commas, CRLF and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(std::istream& in, const std::string& origin) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    char c;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field.empty() && !field_started) {
                    in_quotes = true;
                    field_started = true;
                } else {
                    field.push_back(c); // stray quote inside unquoted field, keep as-is
                }
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (in.peek() == '\n') in.get(c);
                end_record();
                break;
            case '\n':
                end_record();
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw data_error(origin + ": unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

double parse_numeric(const std::string& cell, const std::string& column, std::size_t row) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw data_error("row " + std::to_string(row) + ": cannot parse '" + cell +
                         "' in numeric column '" + column + "'");
    return value;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

RawTable read_csv(const std::filesystem::path& path, const Schema& schema) {
    schema.validate();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path.string());
    const auto records = parse_csv(in, path.string());
    if (records.empty()) throw data_error(path.string() + ": empty file");

    const auto& header = records.front();
    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) col_index.emplace(header[i], i);

    auto require_column = [&](const std::string& name) -> std::size_t {
        const auto it = col_index.find(name);
        if (it == col_index.end())
            throw config_error(path.string() + ": schema column '" + name +
                               "' not found in header");
        return it->second;
    };

    // Resolve header positions of every used column up front; a missing one
    // is a schema error naming the column.
    struct UsedColumn {
        const SchemaColumn* schema_col;
        std::size_t index;
    };
    std::vector<UsedColumn> used;
    for (const auto& col : schema.columns) {
        const std::size_t idx = require_column(col.name);
        if (col.kind != ColumnKind::drop) used.push_back({&col, idx});
    }
    const std::size_t label_idx = require_column(schema.label_column);
    std::size_t group_idx = 0;
    if (schema.group_column) group_idx = require_column(*schema.group_column);

    // Keep rows that are complete in every used column (features, label,
    // group); count the rest.
    std::vector<std::size_t> kept;
    std::int64_t dropped = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& row = records[r];
        if (row.size() == 1 && row[0].empty()) continue; // blank line
        if (row.size() != header.size())
            throw data_error(path.string() + ": row " + std::to_string(r) + " has " +
                             std::to_string(row.size()) + " fields, header has " +
                             std::to_string(header.size()));
        bool complete = !is_missing(row[label_idx]);
        if (complete && schema.group_column) complete = !is_missing(row[group_idx]);
        for (const auto& uc : used) {
            if (!complete) break;
            complete = !is_missing(row[uc.index]);
        }
        if (complete)
            kept.push_back(r);
        else
            ++dropped;
    }
    if (kept.empty()) throw data_error(path.string() + ": no complete rows");

    RawTable table;
    table.dropped_rows = dropped;
    table.class_names = schema.class_names();

    // Labels.
    table.labels.reserve(kept.size());
    if (schema.label_rule.kind == LabelRule::Kind::threshold) {
        for (const std::size_t r : kept) {
            const double v = parse_numeric(records[r][label_idx], schema.label_column, r);
            const bool positive = schema.label_rule.op == ">" ? v > schema.label_rule.threshold
                                                              : v >= schema.label_rule.threshold;
            table.labels.push_back(positive ? 1 : 0);
        }
    } else {
        std::map<std::string, int> value_to_class;
        for (std::size_t k = 0; k < schema.label_rule.classes.size(); ++k)
            for (const auto& v : schema.label_rule.classes[k].values)
                value_to_class.emplace(v, static_cast<int>(k));
        for (const std::size_t r : kept) {
            const auto it = value_to_class.find(records[r][label_idx]);
            if (it == value_to_class.end())
                throw data_error("row " + std::to_string(r) + ": label value '" +
                                 records[r][label_idx] + "' not covered by the label rule");
            table.labels.push_back(it->second);
        }
    }

    // Groups: vocabulary is the sorted set of values seen in the full file.
    if (schema.group_column) {
        std::set<std::string> names;
        for (const std::size_t r : kept) names.insert(records[r][group_idx]);
        table.group_names.assign(names.begin(), names.end());
        std::map<std::string, int> name_to_id;
        for (std::size_t i = 0; i < table.group_names.size(); ++i)
            name_to_id.emplace(table.group_names[i], static_cast<int>(i));
        table.groups.reserve(kept.size());
        for (const std::size_t r : kept)
            table.groups.push_back(name_to_id.at(records[r][group_idx]));
    }

    // Feature columns, in schema order.
    for (const auto& uc : used) {
        if (uc.schema_col->kind == ColumnKind::numeric) {
            RawTable::NumericColumn col;
            col.name = uc.schema_col->name;
            col.values.reserve(kept.size());
            for (const std::size_t r : kept)
                col.values.push_back(parse_numeric(records[r][uc.index], col.name, r));
            table.columns.emplace_back(std::move(col));
        } else {
            RawTable::CategoricalColumn col;
            col.name = uc.schema_col->name;
            if (uc.schema_col->vocabulary.empty()) {
                // Collected from the full file before any split.
                std::set<std::string> values;
                for (const std::size_t r : kept) values.insert(records[r][uc.index]);
                col.vocabulary.assign(values.begin(), values.end());
            } else {
                col.vocabulary = uc.schema_col->vocabulary;
                std::sort(col.vocabulary.begin(), col.vocabulary.end());
            }
            std::map<std::string, int> code;
            for (std::size_t i = 0; i < col.vocabulary.size(); ++i)
                code.emplace(col.vocabulary[i], static_cast<int>(i));
            col.codes.reserve(kept.size());
            for (const std::size_t r : kept) {
                const auto it = code.find(records[r][uc.index]);
                if (it == code.end())
                    throw data_error("row " + std::to_string(r) + ": value '" +
                                     records[r][uc.index] + "' in column '" + col.name +
                                     "' is outside the declared vocabulary");
                col.codes.push_back(it->second);
            }
            table.columns.emplace_back(std::move(col));
        }
    }
    return table;
}

TabularDataset preprocess(const RawTable& raw, const PreprocessOptions& options) {
    if (raw.rows() == 0) throw data_error("preprocess: empty table");
    const std::int64_t n = raw.rows();

    std::int64_t dim = 0;
    for (const auto& col : raw.columns) {
        if (std::holds_alternative<RawTable::NumericColumn>(col))
            dim += 1;
        else
            dim += static_cast<std::int64_t>(
                std::get<RawTable::CategoricalColumn>(col).vocabulary.size());
    }
    if (dim == 0) throw data_error("preprocess: no feature columns");

    TabularDataset ds;
    ds.features.resize(n, dim);
    ds.labels = raw.labels;
    ds.groups = raw.groups;
    ds.class_names = raw.class_names;
    ds.group_names = raw.group_names;
    ds.dropped_rows = raw.dropped_rows;

    std::int64_t j = 0;
    for (const auto& col : raw.columns) {
        if (const auto* num = std::get_if<RawTable::NumericColumn>(&col)) {
            ds.feature_names.push_back(num->name);
            for (std::int64_t i = 0; i < n; ++i)
                ds.features(i, j) = num->values[static_cast<std::size_t>(i)];
            if (options.standardize) {
                const double mean = ds.features.col(j).mean();
                const double var =
                    (ds.features.col(j).array() - mean).square().sum() / static_cast<double>(n);
                const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
                ds.features.col(j) = (ds.features.col(j).array() - mean) / scale;
            }
            ++j;
        } else {
            const auto& cat = std::get<RawTable::CategoricalColumn>(col);
            const std::int64_t width = static_cast<std::int64_t>(cat.vocabulary.size());
            for (std::int64_t v = 0; v < width; ++v)
                ds.feature_names.push_back(cat.name + "=" +
                                           cat.vocabulary[static_cast<std::size_t>(v)]);
            ds.features.block(0, j, n, width).setZero();
            for (std::int64_t i = 0; i < n; ++i)
                ds.features(i, j + cat.codes[static_cast<std::size_t>(i)]) = 1.0;
            j += width;
        }
    }

    ds.validate();
    return ds;
}

TabularDataset load_csv(const std::filesystem::path& path, const Schema& schema,
                        const PreprocessOptions& options) {
    return preprocess(read_csv(path, schema), options);
}

void TabularDataset::validate() const {
    const std::int64_t n = rows();
    if (n == 0) throw data_error("dataset: no rows");
    if (dim() == 0) throw data_error("dataset: no features");
    if (static_cast<std::int64_t>(labels.size()) != n)
        throw data_error("dataset: labels/features row mismatch");
    if (!groups.empty() && static_cast<std::int64_t>(groups.size()) != n)
        throw data_error("dataset: groups/features row mismatch");
    if (static_cast<std::int64_t>(feature_names.size()) != dim())
        throw data_error("dataset: feature_names/dim mismatch");
    if (num_classes() < 2) throw data_error("dataset: needs at least 2 classes");
    if (!features.allFinite()) throw data_error("dataset: non-finite feature value");
    for (const int y : labels)
        if (y < 0 || y >= num_classes())
            throw data_error("dataset: label " + std::to_string(y) + " outside [0, " +
                             std::to_string(num_classes()) + ")");
    for (const int g : groups)
        if (g < 0 || g >= static_cast<int>(group_names.size()))
            throw data_error("dataset: group id " + std::to_string(g) + " out of range");
}

TabularDataset TabularDataset::select(std::span<const int> row_indices) const {
    TabularDataset out;
    out.features.resize(static_cast<std::int64_t>(row_indices.size()), dim());
    out.labels.reserve(row_indices.size());
    if (has_groups()) out.groups.reserve(row_indices.size());
    std::int64_t i = 0;
    for (const int r : row_indices) {
        if (r < 0 || r >= rows())
            throw data_error("select: row " + std::to_string(r) + " out of range");
        out.features.row(i++) = features.row(r);
        out.labels.push_back(labels[static_cast<std::size_t>(r)]);
        if (has_groups()) out.groups.push_back(groups[static_cast<std::size_t>(r)]);
    }
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.group_names = group_names;
    return out;
}

std::vector<int> TabularDataset::rows_with_label(int label) const {
    std::vector<int> out;
    for (std::int64_t i = 0; i < rows(); ++i)
        if (labels[static_cast<std::size_t>(i)] == label) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> TabularDataset::rows_with_group(int group) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < groups.size(); ++i)
        if (groups[i] == group) out.push_back(static_cast<int>(i));
    return out;
}

int TabularDataset::group_id(const std::string& name) const {
    for (std::size_t i = 0; i < group_names.size(); ++i)
        if (group_names[i] == name) return static_cast<int>(i);
    return -1;
}

void TabularDataset::save(const std::filesystem::path& csv_path) const {
    validate();
    std::ofstream out(csv_path);
    if (!out) throw data_error("cannot write " + csv_path.string());
    for (std::int64_t j = 0; j < dim(); ++j)
        out << '"' << feature_names[static_cast<std::size_t>(j)] << "\",";
    out << "label";
    if (has_groups()) out << ",group";
    out << '\n';
    for (std::int64_t i = 0; i < rows(); ++i) {
        for (std::int64_t j = 0; j < dim(); ++j) out << format_double(features(i, j)) << ',';
        out << labels[static_cast<std::size_t>(i)];
        if (has_groups()) out << ',' << groups[static_cast<std::size_t>(i)];
        out << '\n';
    }

    json meta;
    meta["feature_names"] = feature_names;
    meta["class_names"] = class_names;
    meta["group_names"] = group_names;
    meta["rows"] = rows();
    meta["dropped_rows"] = dropped_rows;
    std::ofstream mout(csv_path.string() + ".meta.json");
    mout << meta.dump(2) << '\n';
}

TabularDataset TabularDataset::load(const std::filesystem::path& csv_path) {
    std::ifstream min(csv_path.string() + ".meta.json");
    if (!min) throw data_error("cannot open " + csv_path.string() + ".meta.json");
    json meta = json::parse(min, nullptr, true);

    TabularDataset ds;
    ds.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
    ds.class_names = meta.at("class_names").get<std::vector<std::string>>();
    ds.group_names = meta.at("group_names").get<std::vector<std::string>>();
    ds.dropped_rows = meta.value("dropped_rows", 0);

    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw data_error("cannot open " + csv_path.string());
    const auto records = parse_csv(in, csv_path.string());
    if (records.size() < 2) throw data_error(csv_path.string() + ": no data rows");
    const std::int64_t d = static_cast<std::int64_t>(ds.feature_names.size());
    const bool with_groups = !ds.group_names.empty();
    const std::int64_t n = static_cast<std::int64_t>(records.size()) - 1;

    ds.features.resize(n, d);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& row = records[static_cast<std::size_t>(i) + 1];
        if (static_cast<std::int64_t>(row.size()) != d + 1 + (with_groups ? 1 : 0))
            throw data_error(csv_path.string() + ": row " + std::to_string(i + 1) +
                             " has wrong field count");
        for (std::int64_t jcol = 0; jcol < d; ++jcol)
            ds.features(i, jcol) =
                parse_numeric(row[static_cast<std::size_t>(jcol)], "f", static_cast<std::size_t>(i));
        ds.labels.push_back(static_cast<int>(
            parse_numeric(row[static_cast<std::size_t>(d)], "label", static_cast<std::size_t>(i))));
        if (with_groups)
            ds.groups.push_back(static_cast<int>(parse_numeric(
                row[static_cast<std::size_t>(d) + 1], "group", static_cast<std::size_t>(i))));
    }
    ds.validate();
    return ds;
}

} // namespace hetmia
