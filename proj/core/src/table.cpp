#include "hetmia/experiment.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hetmia/errors.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

std::string scientific3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v); // 3 significant digits
    return buf;
}

std::string percent2(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
    return buf;
}

} // namespace

// Column order: dataset, splitting, rho, heterogeneity, mean_accuracy_pct,
// std_accuracy_pct, n_runs.
std::string emit_table(const ExperimentReport& report, TableFormat format) {
    if (report.aggregates.empty()) throw data_error("emit_table: empty report");
    const std::string dataset = report.config.name;
    const std::string splitting = to_string(report.config.split.strategy);

    if (format == TableFormat::json) {
        json j;
        j["config"] = json::parse(report.config.to_json()); // full config echo
        j["rows"] = json::array();
        for (const auto& agg : report.aggregates)
            j["rows"].push_back(json{{"dataset", dataset},
                                     {"splitting", splitting},
                                     {"rho", agg.rho},
                                     {"heterogeneity", scientific3(report.heterogeneity_mean)},
                                     {"mean_accuracy_pct", percent2(agg.mean_accuracy)},
                                     {"std_accuracy_pct", percent2(agg.std_accuracy)},
                                     {"n_runs", agg.n_runs}});
        return j.dump(2) + "\n";
    }

    std::ostringstream os;
    if (format == TableFormat::csv) {
        os << "dataset,splitting,rho,heterogeneity,mean_accuracy_pct,std_accuracy_pct,n_runs\n";
        for (const auto& agg : report.aggregates)
            os << dataset << ',' << splitting << ',' << agg.rho << ','
               << scientific3(report.heterogeneity_mean) << ',' << percent2(agg.mean_accuracy)
               << ',' << percent2(agg.std_accuracy) << ',' << agg.n_runs << '\n';
        return os.str();
    }

    os << "| dataset | splitting | rho | heterogeneity | mean accuracy (%) | std (%) | runs |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (const auto& agg : report.aggregates)
        os << "| " << dataset << " | " << splitting << " | " << agg.rho << " | "
           << scientific3(report.heterogeneity_mean) << " | " << percent2(agg.mean_accuracy)
           << " | " << percent2(agg.std_accuracy) << " | " << agg.n_runs << " |\n";
    return os.str();
}

} // namespace hetmia
