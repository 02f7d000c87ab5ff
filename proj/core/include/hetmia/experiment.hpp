#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hetmia/attack.hpp"
#include "hetmia/fedavg.hpp"
#include "hetmia/metric.hpp"
#include "hetmia/splitting.hpp"

namespace hetmia {

struct ExperimentConfig {
    std::string name;
    std::filesystem::path dataset_csv;
    std::filesystem::path schema_path;

    bool standardize_model = true;  // feature view for training / attack
    bool standardize_metric = false; // feature view for the heterogeneity metric

    std::vector<int> hidden = {32}; // target & shadow architecture
    SplitPlan split;                // per-repeat seed is derived
    FLConfig fl;
    AttackConfig attack;
    int challenge_per_side = 40;
    std::vector<double> rho_list = {0.0};
    int repeats = 10;
    std::uint64_t master_seed = 0;
    std::filesystem::path out_dir = "out";

    void validate() const; // throws config_error
    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig from_json(const std::string& text,
                                      const std::filesystem::path& base_dir = {});
    std::string to_json() const;
};

struct RhoResult {
    double rho = 0.0;
    AttackResult attack;
};

struct RunRecord {
    int repeat = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::int64_t attacker_rows = 0, target_rows = 0, nonmember_same_rows = 0,
                 nonmember_third_rows = 0;
    HeterogeneityReport heterogeneity;
    std::vector<RhoResult> per_rho;
    double seconds = 0.0; // not serialized into report.json (kept reproducible)
};

struct RhoAggregate {
    double rho = 0.0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0; // sample std, n-1 denominator; 0 for n=1
    int n_runs = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::int64_t dataset_rows = 0;
    std::int64_t dataset_dropped_rows = 0;
    int num_classes = 0;
    std::int64_t model_dim = 0, metric_dim = 0;
    std::vector<RunRecord> runs;
    std::vector<RhoAggregate> aggregates;
    double heterogeneity_mean = 0.0; // over successful runs
    double total_seconds = 0.0;      // not serialized into report.json

    std::string to_json() const;
};

// Runs every (repeat, rho) cell. A failed repeat is recorded, not retried;
// aggregates cover the successes. Throws data_error when all repeats fail.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// report.json, table.csv, table.md, timings.json, and per-run artifacts
// under runs/<index>/.
void write_experiment_outputs(const ExperimentReport& report,
                              const std::filesystem::path& out_dir);

enum class TableFormat { csv, markdown, json };

// One row per (dataset, splitting, rho): heterogeneity (scientific, 3
// significant digits), mean/std accuracy (percent, 2 decimals), n_runs.
std::string emit_table(const ExperimentReport& report, TableFormat format);

} // namespace hetmia
