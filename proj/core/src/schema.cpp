#include "hetmia/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hetmia/errors.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

ColumnKind kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::numeric;
    if (s == "categorical") return ColumnKind::categorical;
    if (s == "drop") return ColumnKind::drop;
    throw config_error("schema: unknown column kind '" + s + "'");
}

std::string kind_to_string(ColumnKind k) {
    switch (k) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::drop: return "drop";
    }
    return "numeric";
}

} // namespace

void Schema::validate() const {
    if (label_column.empty()) throw config_error("schema: label column missing");
    std::set<std::string> seen;
    for (const auto& col : columns) {
        if (col.name.empty()) throw config_error("schema: empty column name");
        if (!seen.insert(col.name).second)
            throw config_error("schema: duplicate column '" + col.name + "'");
        if (col.name == label_column)
            throw config_error("schema: label column '" + label_column +
                               "' also listed as a feature");
    }
    if (label_rule.kind == LabelRule::Kind::threshold) {
        if (label_rule.op != ">" && label_rule.op != ">=")
            throw config_error("schema: label rule op must be '>' or '>=', got '" +
                               label_rule.op + "'");
    } else {
        if (label_rule.classes.size() < 2)
            throw config_error("schema: category label rule needs at least 2 classes");
        std::set<std::string> values;
        for (const auto& cls : label_rule.classes) {
            if (cls.values.empty())
                throw config_error("schema: label class '" + cls.name + "' has no values");
            for (const auto& v : cls.values)
                if (!values.insert(v).second)
                    throw config_error("schema: label value '" + v +
                                       "' mapped to more than one class");
        }
    }
}

int Schema::num_classes() const {
    return label_rule.kind == LabelRule::Kind::threshold
               ? 2
               : static_cast<int>(label_rule.classes.size());
}

std::vector<std::string> Schema::class_names() const {
    if (label_rule.kind == LabelRule::Kind::threshold)
        return {"not_" + positive_label_name, positive_label_name};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < label_rule.classes.size(); ++i) {
        const auto& n = label_rule.classes[i].name;
        names.push_back(n.empty() ? "class" + std::to_string(i) : n);
    }
    return names;
}

Schema Schema::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("schema: invalid JSON: ") + e.what());
    }
    Schema schema;
    try {
        for (const auto& jc : j.at("columns")) {
            SchemaColumn col;
            col.name = jc.at("name").get<std::string>();
            col.kind = kind_from_string(jc.value("kind", "numeric"));
            if (jc.contains("values"))
                col.vocabulary = jc.at("values").get<std::vector<std::string>>();
            schema.columns.push_back(std::move(col));
        }
        const auto& jl = j.at("label");
        schema.label_column = jl.at("column").get<std::string>();
        schema.positive_label_name = jl.value("positive_name", "positive");
        const std::string rule = jl.value("rule", "threshold");
        if (rule == "threshold") {
            schema.label_rule.kind = LabelRule::Kind::threshold;
            schema.label_rule.op = jl.value("op", ">=");
            schema.label_rule.threshold = jl.at("value").get<double>();
        } else if (rule == "categories") {
            schema.label_rule.kind = LabelRule::Kind::categories;
            for (const auto& jcls : jl.at("classes")) {
                LabelRule::CategoryClass cls;
                cls.name = jcls.value("name", "");
                cls.values = jcls.at("values").get<std::vector<std::string>>();
                schema.label_rule.classes.push_back(std::move(cls));
            }
        } else {
            throw config_error("schema: unknown label rule '" + rule + "'");
        }
        if (j.contains("group_column") && !j.at("group_column").is_null())
            schema.group_column = j.at("group_column").get<std::string>();
    } catch (const json::exception& e) {
        throw config_error(std::string("schema: ") + e.what());
    }
    schema.validate();
    return schema;
}

Schema Schema::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("schema: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string Schema::to_json() const {
    json j;
    j["columns"] = json::array();
    for (const auto& col : columns) {
        json jc{{"name", col.name}, {"kind", kind_to_string(col.kind)}};
        if (!col.vocabulary.empty()) jc["values"] = col.vocabulary;
        j["columns"].push_back(std::move(jc));
    }
    json jl{{"column", label_column}, {"positive_name", positive_label_name}};
    if (label_rule.kind == LabelRule::Kind::threshold) {
        jl["rule"] = "threshold";
        jl["op"] = label_rule.op;
        jl["value"] = label_rule.threshold;
    } else {
        jl["rule"] = "categories";
        jl["classes"] = json::array();
        for (const auto& cls : label_rule.classes)
            jl["classes"].push_back(json{{"name", cls.name}, {"values", cls.values}});
    }
    j["label"] = std::move(jl);
    if (group_column) j["group_column"] = *group_column;
    return j.dump(2);
}

} // namespace hetmia
