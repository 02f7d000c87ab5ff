// hetero-mia: metric | split | attack | run-experiment | synth
//
// Exit codes: 0 success, 1 config error, 2 data error, 3 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "hetmia/errors.hpp"
#include "hetmia/experiment.hpp"
#include "hetmia/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hetmia;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

// The metric compares two files under one schema. When the schema does not
// declare categorical vocabularies, take the union over both files so the
// one-hot spaces line up.
Schema align_vocabularies(const Schema& schema, const fs::path& a, const fs::path& b) {
    Schema aligned = schema;
    bool needs_alignment = false;
    for (const auto& col : aligned.columns)
        needs_alignment |= col.kind == ColumnKind::categorical && col.vocabulary.empty();
    if (!needs_alignment) return aligned;

    const RawTable ra = read_csv(a, schema);
    const RawTable rb = read_csv(b, schema);
    for (auto& col : aligned.columns) {
        if (col.kind != ColumnKind::categorical || !col.vocabulary.empty()) continue;
        std::set<std::string> values;
        for (const auto* raw : {&ra, &rb})
            for (const auto& c : raw->columns)
                if (const auto* cat = std::get_if<RawTable::CategoricalColumn>(&c))
                    if (cat->name == col.name)
                        values.insert(cat->vocabulary.begin(), cat->vocabulary.end());
        col.vocabulary.assign(values.begin(), values.end());
    }
    return aligned;
}

int run_metric(const fs::path& a, const fs::path& b, const fs::path& schema_path,
               bool standardize, const std::string& out) {
    const Schema schema = align_vocabularies(Schema::from_file(schema_path), a, b);
    const PreprocessOptions opts{.standardize = standardize};
    const TabularDataset da = load_csv(a, schema, opts);
    const TabularDataset db = load_csv(b, schema, opts);
    const HeterogeneityReport report = heterogeneity(da, db);
    if (out.empty())
        std::cout << report.to_json() << '\n';
    else
        write_text(out, report.to_json());
    std::cerr << report.summary() << '\n';
    return 0;
}

int run_split(const fs::path& data, const fs::path& schema_path, const fs::path& plan_path,
              std::optional<std::uint64_t> seed, const std::string& out) {
    const Schema schema = Schema::from_file(schema_path);
    const TabularDataset ds = load_csv(data, schema);
    std::ifstream in(plan_path);
    if (!in) throw config_error("cannot open plan " + plan_path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    SplitPlan plan = SplitPlan::from_json(buf.str());
    if (seed) plan.seed = *seed;
    const SplitOutput split = make_split(ds, plan);
    if (out.empty())
        std::cout << split.to_json() << '\n';
    else
        write_text(out, split.to_json());
    std::cerr << "split: attacker " << split.attacker_idx.size() << ", target "
              << split.target_idx.size() << ", non-member same "
              << split.nonmember_same_idx.size() << ", third "
              << split.nonmember_third_idx.size() << '\n';
    return 0;
}

int run_attack_cmd(const fs::path& config_path, std::optional<std::uint64_t> seed,
                   std::string out_dir, bool dump_scores) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (seed) cfg.master_seed = *seed;
    cfg.repeats = 1; // one pipeline pass; run-experiment does the sweep
    const ExperimentReport report = run_experiment(cfg);
    if (out_dir.empty()) out_dir = cfg.out_dir.string();
    fs::create_directories(out_dir);
    const RunRecord& run = report.runs.front();
    for (std::size_t ri = 0; ri < run.per_rho.size(); ++ri) {
        const auto& rr = run.per_rho[ri];
        write_text(fs::path(out_dir) / ("attack_" + std::to_string(ri) + ".json"),
                   rr.attack.to_json());
        if (dump_scores)
            write_text(fs::path(out_dir) / ("scores_" + std::to_string(ri) + ".csv"),
                       rr.attack.scores_csv());
        std::cerr << "rho " << rr.rho << ": accuracy " << 100.0 * rr.attack.accuracy << "%\n";
    }
    write_text(fs::path(out_dir) / "heterogeneity.json", run.heterogeneity.to_json());
    return 0;
}

int run_experiment_cmd(const fs::path& config_path, std::optional<std::uint64_t> seed,
                       std::string out_dir) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (seed) cfg.master_seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    const ExperimentReport report = run_experiment(cfg);
    write_experiment_outputs(report, cfg.out_dir);
    std::cerr << emit_table(report, TableFormat::markdown);
    std::cerr << "report written to " << cfg.out_dir.string() << '\n';
    return 0;
}

int run_synth(const fs::path& spec_path, std::uint64_t seed, const std::string& out_dir) {
    const SyntheticSpec spec = SyntheticSpec::from_file(spec_path);
    const TabularDataset ds = gen_synthetic(spec, seed);
    fs::create_directories(out_dir);
    ds.save(fs::path(out_dir) / "data.csv");

    // A schema matching the emitted CSV, so metric/split/attack can consume it.
    Schema schema;
    for (const auto& name : ds.feature_names)
        schema.columns.push_back({name, ColumnKind::numeric, {}});
    schema.label_column = "label";
    schema.label_rule.kind = LabelRule::Kind::categories;
    for (std::size_t k = 0; k < ds.class_names.size(); ++k)
        schema.label_rule.classes.push_back({ds.class_names[k], {std::to_string(k)}});
    schema.group_column = "group";
    write_text(fs::path(out_dir) / "schema.json", schema.to_json());
    std::cerr << "synth: " << ds.rows() << " rows, " << ds.dim() << " features -> " << out_dir
              << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-heterogeneity metric and membership-inference experiment harness"};
    app.require_subcommand(1);

    std::string a_path, b_path, schema_path, plan_path, config_path, spec_path;
    std::string out;
    bool standardize = false, dump_scores = false;
    std::optional<std::uint64_t> seed;
    std::uint64_t synth_seed = 0;

    auto* metric = app.add_subcommand("metric", "Heterogeneity between two datasets");
    metric->add_option("--a", a_path, "First CSV")->required();
    metric->add_option("--b", b_path, "Second CSV")->required();
    metric->add_option("--schema", schema_path, "Schema JSON")->required();
    metric->add_flag("--standardize", standardize, "Standardize numeric columns first");
    metric->add_option("--out", out, "Write the report JSON here instead of stdout");

    auto* split = app.add_subcommand("split", "Attacker/target/non-member split");
    split->add_option("--data", a_path, "Dataset CSV")->required();
    split->add_option("--schema", schema_path, "Schema JSON")->required();
    split->add_option("--plan", plan_path, "Split plan JSON")->required();
    split->add_option("--seed", seed, "Override the plan seed");
    split->add_option("--out", out, "Write the index lists here instead of stdout");

    auto* attack = app.add_subcommand("attack", "One attack pipeline pass");
    attack->add_option("--config", config_path, "Experiment config JSON")->required();
    attack->add_option("--seed", seed, "Override the master seed");
    attack->add_option("--out", out, "Output directory");
    attack->add_flag("--scores", dump_scores, "Dump per-point scores as CSV");

    auto* runexp = app.add_subcommand("run-experiment", "Full seed/rho sweep");
    runexp->add_option("--config", config_path, "Experiment config JSON")->required();
    runexp->add_option("--seed", seed, "Override the master seed");
    runexp->add_option("--out", out, "Override the output directory");

    auto* synth = app.add_subcommand("synth", "Sample a synthetic dataset");
    synth->add_option("--config", spec_path, "Synthetic spec JSON")->required();
    synth->add_option("--seed", synth_seed, "Sampling seed");
    synth->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
        if (metric->parsed()) return run_metric(a_path, b_path, schema_path, standardize, out);
        if (split->parsed()) return run_split(a_path, schema_path, plan_path, seed, out);
        if (attack->parsed()) return run_attack_cmd(config_path, seed, out, dump_scores);
        if (runexp->parsed()) return run_experiment_cmd(config_path, seed, out);
        if (synth->parsed()) return run_synth(spec_path, synth_seed, out);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // --help is a success; bad usage is a config error
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
