#include "hetmia/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hetmia/errors.hpp"
#include "hetmia/rng.hpp"
#include "hetmia/synthetic.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

constexpr std::uint64_t kRepeatStream = 0x1000;
constexpr std::uint64_t kSplitStream = 0x1;
constexpr std::uint64_t kFlStream = 0x2;
constexpr std::uint64_t kAttackStream = 0x3;
constexpr std::uint64_t kChallengeStream = 0x4;

TrainConfig train_config_from(const json& j) {
    TrainConfig cfg;
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.l2 = j.value("l2", cfg.l2);
    return cfg;
}

json train_config_to(const TrainConfig& cfg, bool with_epochs) {
    json j{{"learning_rate", cfg.learning_rate},
           {"batch_size", cfg.batch_size},
           {"l2", cfg.l2}};
    if (with_epochs) j["epochs"] = cfg.epochs;
    return j;
}

AttackFeature feature_from_string(const std::string& s) {
    if (s == "prediction_vector") return AttackFeature::prediction_vector;
    if (s == "loss") return AttackFeature::loss;
    if (s == "correctness") return AttackFeature::correctness;
    if (s == "last_layer_grad_norm") return AttackFeature::last_layer_grad_norm;
    throw config_error("experiment config: unknown attack feature '" + s + "'");
}

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (const double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double sum = 0.0;
    for (const double x : v) sum += (x - mean) * (x - mean);
    return std::sqrt(sum / static_cast<double>(v.size() - 1));
}

} // namespace

void ExperimentConfig::validate() const {
    if (dataset_csv.empty()) throw config_error("experiment config: dataset csv missing");
    if (schema_path.empty()) throw config_error("experiment config: schema missing");
    if (repeats < 1) throw config_error("experiment config: repeats must be >= 1");
    if (challenge_per_side < 1)
        throw config_error("experiment config: challenge_per_side must be >= 1");
    if (rho_list.empty()) throw config_error("experiment config: rho list is empty");
    for (const double rho : rho_list)
        if (rho < 0.0 || rho > 1.0)
            throw config_error("experiment config: rho values must be in [0, 1]");
    if (hidden.empty()) throw config_error("experiment config: hidden layer list is empty");
    split.validate();
    fl.validate();
    attack.validate();
    if (!std::filesystem::exists(dataset_csv))
        throw config_error("experiment config: dataset file not found: " + dataset_csv.string());
    if (!std::filesystem::exists(schema_path))
        throw config_error("experiment config: schema file not found: " + schema_path.string());
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text,
                                             const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("experiment config: invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.name = j.value("name", "experiment");
        cfg.dataset_csv = j.at("dataset").at("csv").get<std::string>();
        cfg.schema_path = j.at("dataset").at("schema").get<std::string>();
        if (!base_dir.empty()) {
            if (cfg.dataset_csv.is_relative()) cfg.dataset_csv = base_dir / cfg.dataset_csv;
            if (cfg.schema_path.is_relative()) cfg.schema_path = base_dir / cfg.schema_path;
        }
        if (j.contains("standardize")) {
            cfg.standardize_model = j.at("standardize").value("model", true);
            cfg.standardize_metric = j.at("standardize").value("metric", false);
        }
        if (j.contains("model"))
            cfg.hidden = j.at("model").value("hidden", std::vector<int>{32});
        cfg.split = SplitPlan::from_json(j.at("split").dump());

        if (j.contains("fl")) {
            const auto& jf = j.at("fl");
            cfg.fl.clients = jf.value("clients", cfg.fl.clients);
            cfg.fl.rounds = jf.value("rounds", cfg.fl.rounds);
            cfg.fl.local_epochs = jf.value("local_epochs", cfg.fl.local_epochs);
            const std::string partition = jf.value("partition", "uniform");
            if (partition == "uniform")
                cfg.fl.partition = PartitionStrategy::uniform;
            else if (partition == "by_group")
                cfg.fl.partition = PartitionStrategy::by_group;
            else
                throw config_error("experiment config: unknown partition '" + partition + "'");
            cfg.fl.local = train_config_from(jf);
        }

        if (j.contains("attack")) {
            const auto& ja = j.at("attack");
            if (ja.contains("features")) {
                cfg.attack.features.clear();
                for (const auto& f : ja.at("features"))
                    cfg.attack.features.push_back(feature_from_string(f.get<std::string>()));
            }
            cfg.attack.rounds_used = ja.value("rounds_used", std::vector<int>{});
            cfg.attack.shadow_split_fraction =
                ja.value("shadow_split_fraction", cfg.attack.shadow_split_fraction);
            cfg.attack.shadow_federated = ja.value("shadow_federated", false);
            cfg.attack.classifier_hidden =
                ja.value("classifier_hidden", cfg.attack.classifier_hidden);
            cfg.attack.shadow_train = ja.contains("shadow_train")
                                          ? train_config_from(ja.at("shadow_train"))
                                          : cfg.fl.local;
            if (ja.contains("classifier_train"))
                cfg.attack.classifier_train = train_config_from(ja.at("classifier_train"));
            if (ja.contains("classifier_train") && ja.at("classifier_train").contains("epochs"))
                cfg.attack.classifier_train.epochs =
                    ja.at("classifier_train").at("epochs").get<int>();
        }
        cfg.attack.shadow_train.epochs = cfg.fl.local_epochs;

        cfg.challenge_per_side = j.value("challenge_per_side", cfg.challenge_per_side);
        cfg.rho_list = j.value("rho_list", std::vector<double>{0.0});
        cfg.repeats = j.value("repeats", cfg.repeats);
        cfg.master_seed = j.value("seed", 0ULL);
        cfg.out_dir = j.value("out_dir", std::string("out"));
    } catch (const json::exception& e) {
        throw config_error(std::string("experiment config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("experiment config: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), path.parent_path());
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["name"] = name;
    j["dataset"] = {{"csv", dataset_csv.string()}, {"schema", schema_path.string()}};
    j["standardize"] = {{"model", standardize_model}, {"metric", standardize_metric}};
    j["model"] = {{"hidden", hidden}};
    j["split"] = json::parse(split.to_json());
    j["fl"] = {{"clients", fl.clients},
               {"rounds", fl.rounds},
               {"local_epochs", fl.local_epochs},
               {"partition", fl.partition == PartitionStrategy::uniform ? "uniform" : "by_group"},
               {"learning_rate", fl.local.learning_rate},
               {"batch_size", fl.local.batch_size},
               {"l2", fl.local.l2}};
    json features = json::array();
    for (const auto f : attack.features) features.push_back(to_string(f));
    j["attack"] = {{"features", std::move(features)},
                   {"rounds_used", attack.rounds_used},
                   {"shadow_split_fraction", attack.shadow_split_fraction},
                   {"shadow_federated", attack.shadow_federated},
                   {"classifier_hidden", attack.classifier_hidden},
                   {"shadow_train", train_config_to(attack.shadow_train, false)},
                   {"classifier_train", train_config_to(attack.classifier_train, true)}};
    j["challenge_per_side"] = challenge_per_side;
    j["rho_list"] = rho_list;
    j["repeats"] = repeats;
    j["seed"] = master_seed;
    j["out_dir"] = out_dir.string();
    return j.dump(2);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const Schema schema = Schema::from_file(cfg.schema_path);
    const RawTable raw = read_csv(cfg.dataset_csv, schema);
    const TabularDataset model_view = preprocess(raw, {.standardize = cfg.standardize_model});
    const TabularDataset metric_view = preprocess(raw, {.standardize = cfg.standardize_metric});

    ExperimentReport report;
    report.config = cfg;
    report.dataset_rows = model_view.rows();
    report.dataset_dropped_rows = model_view.dropped_rows;
    report.num_classes = model_view.num_classes();
    report.model_dim = model_view.dim();
    report.metric_dim = metric_view.dim();

    const Architecture arch{static_cast<int>(model_view.dim()), cfg.hidden,
                            model_view.num_classes()};

    for (int r = 0; r < cfg.repeats; ++r) {
        const auto t_run = std::chrono::steady_clock::now();
        RunRecord record;
        record.repeat = r;
        record.seed = mix_seed(cfg.master_seed, kRepeatStream + static_cast<std::uint64_t>(r));
        try {
            SplitPlan plan = cfg.split;
            plan.seed = mix_seed(record.seed, kSplitStream);
            const SplitOutput split = make_split(model_view, plan);
            record.attacker_rows = static_cast<std::int64_t>(split.attacker_idx.size());
            record.target_rows = static_cast<std::int64_t>(split.target_idx.size());
            record.nonmember_same_rows =
                static_cast<std::int64_t>(split.nonmember_same_idx.size());
            record.nonmember_third_rows =
                static_cast<std::int64_t>(split.nonmember_third_idx.size());

            record.heterogeneity = heterogeneity(metric_view.select(split.attacker_idx),
                                                 metric_view.select(split.target_idx));

            FLConfig fl = cfg.fl;
            fl.seed = mix_seed(record.seed, kFlStream);
            const auto snapshots = run_rounds(model_view.select(split.target_idx), arch, fl);

            AttackConfig attack = cfg.attack;
            attack.seed = mix_seed(record.seed, kAttackStream);
            const ModelParams classifier =
                train_shadow_attack(model_view.select(split.attacker_idx), arch, fl, attack)
                    .classifier;

            for (std::size_t ri = 0; ri < cfg.rho_list.size(); ++ri) {
                const double rho = cfg.rho_list[ri];
                const ChallengeSet challenge = build_challenge(
                    split, model_view, cfg.challenge_per_side, rho,
                    mix_seed(mix_seed(record.seed, kChallengeStream),
                             static_cast<std::uint64_t>(ri)));
                RhoResult rr;
                rr.rho = rho;
                rr.attack = run_attack(classifier, snapshots, challenge, attack);
                record.per_rho.push_back(std::move(rr));
            }
            record.ok = true;
        } catch (const std::exception& e) {
            record.ok = false;
            record.error = e.what();
            record.per_rho.clear();
        }
        record.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_run).count();
        report.runs.push_back(std::move(record));
    }

    int successes = 0;
    double het_sum = 0.0;
    for (const auto& run : report.runs)
        if (run.ok) {
            ++successes;
            het_sum += run.heterogeneity.average;
        }
    if (successes == 0)
        throw data_error("experiment: all " + std::to_string(cfg.repeats) + " repeats failed; first error: " +
                         (report.runs.empty() ? "?" : report.runs.front().error));
    report.heterogeneity_mean = het_sum / static_cast<double>(successes);

    for (std::size_t ri = 0; ri < cfg.rho_list.size(); ++ri) {
        std::vector<double> accs;
        for (const auto& run : report.runs)
            if (run.ok) accs.push_back(run.per_rho[ri].attack.accuracy);
        RhoAggregate agg;
        agg.rho = cfg.rho_list[ri];
        agg.n_runs = static_cast<int>(accs.size());
        agg.mean_accuracy = mean_of(accs);
        agg.std_accuracy = sample_std(accs, agg.mean_accuracy);
        report.aggregates.push_back(agg);
    }

    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

std::string ExperimentReport::to_json() const {
    json j;
    j["config"] = json::parse(config.to_json());
    j["dataset"] = {{"rows", dataset_rows},
                    {"dropped_rows", dataset_dropped_rows},
                    {"classes", num_classes},
                    {"model_dim", model_dim},
                    {"metric_dim", metric_dim}};
    j["runs"] = json::array();
    for (const auto& run : runs) {
        json jr;
        jr["repeat"] = run.repeat;
        jr["seed"] = run.seed;
        jr["ok"] = run.ok;
        if (!run.ok) jr["error"] = run.error;
        if (run.ok) {
            jr["split_sizes"] = {{"attacker", run.attacker_rows},
                                 {"target", run.target_rows},
                                 {"nonmember_same", run.nonmember_same_rows},
                                 {"nonmember_third", run.nonmember_third_rows}};
            jr["heterogeneity"] = json::parse(run.heterogeneity.to_json());
            jr["attacks"] = json::array();
            for (const auto& rr : run.per_rho) {
                json ja = json::parse(rr.attack.to_json(false));
                ja["rho"] = rr.rho;
                jr["attacks"].push_back(std::move(ja));
            }
        }
        j["runs"].push_back(std::move(jr));
    }
    j["aggregates"] = json::array();
    for (const auto& agg : aggregates)
        j["aggregates"].push_back(json{{"rho", agg.rho},
                                       {"mean_accuracy", agg.mean_accuracy},
                                       {"std_accuracy", agg.std_accuracy},
                                       {"n_runs", agg.n_runs}});
    j["heterogeneity_mean"] = heterogeneity_mean;
    return j.dump(2);
}

void write_experiment_outputs(const ExperimentReport& report,
                              const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(out_dir / "report.json");
        if (!out) throw data_error("cannot write " + (out_dir / "report.json").string());
        out << report.to_json() << '\n';
    }
    {
        std::ofstream out(out_dir / "table.csv");
        out << emit_table(report, TableFormat::csv);
    }
    {
        std::ofstream out(out_dir / "table.md");
        out << emit_table(report, TableFormat::markdown);
    }
    {
        // Wall-clock timings live outside report.json so reruns of the same
        // config reproduce report.json byte for byte.
        json timings;
        timings["total_seconds"] = report.total_seconds;
        timings["runs"] = json::array();
        for (const auto& run : report.runs) timings["runs"].push_back(run.seconds);
        std::ofstream out(out_dir / "timings.json");
        out << timings.dump(2) << '\n';
    }
    for (const auto& run : report.runs) {
        const fs::path run_dir = out_dir / "runs" / std::to_string(run.repeat);
        fs::create_directories(run_dir);
        if (!run.ok) {
            std::ofstream out(run_dir / "error.txt");
            out << run.error << '\n';
            continue;
        }
        {
            std::ofstream out(run_dir / "heterogeneity.json");
            out << run.heterogeneity.to_json() << '\n';
        }
        for (std::size_t ri = 0; ri < run.per_rho.size(); ++ri) {
            std::ofstream out(run_dir / ("attack_" + std::to_string(ri) + ".json"));
            json ja = json::parse(run.per_rho[ri].attack.to_json(true));
            ja["rho"] = run.per_rho[ri].rho;
            out << ja.dump(2) << '\n';
        }
    }
}

} // namespace hetmia
