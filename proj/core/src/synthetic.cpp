#include "hetmia/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "hetmia/errors.hpp"
#include "hetmia/rng.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

// A = V sqrt(max(eig, 0)) so that A A^T = C. Eigenvalues below -tol reject
// the spec as non-PSD before any sampling happens.
Matrix sampling_factor(const Matrix& cov, const std::string& where) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success)
        throw config_error(where + ": eigendecomposition failed");
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    Vector lambda = eig.eigenvalues();
    for (std::int64_t i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -1e-9 * scale)
            throw config_error(where + ": covariance is not positive semi-definite");
        lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    }
    return eig.eigenvectors() * lambda.asDiagonal();
}

} // namespace

void SyntheticSpec::validate() const {
    if (dim < 1) throw config_error("synthetic spec: dim must be >= 1");
    if (num_classes < 2) throw config_error("synthetic spec: needs >= 2 classes");
    if (components.empty()) throw config_error("synthetic spec: no components");
    std::set<int> labels;
    for (const auto& c : components) {
        if (c.count < 1) throw config_error("synthetic spec: component count must be >= 1");
        if (c.label < 0 || c.label >= num_classes)
            throw config_error("synthetic spec: label " + std::to_string(c.label) +
                               " outside [0, " + std::to_string(num_classes) + ")");
        if (c.mean.size() != dim)
            throw config_error("synthetic spec: mean dimension mismatch");
        if (c.covariance.rows() != dim || c.covariance.cols() != dim)
            throw config_error("synthetic spec: covariance shape mismatch");
        const double scale = std::max(1.0, c.covariance.cwiseAbs().maxCoeff());
        if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
            throw config_error("synthetic spec: covariance not symmetric");
        labels.insert(c.label);
    }
    if (static_cast<int>(labels.size()) < 2)
        throw config_error("synthetic spec: fewer than 2 distinct labels");
}

SyntheticSpec SyntheticSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("synthetic spec: invalid JSON: ") + e.what());
    }
    SyntheticSpec spec;
    try {
        spec.dim = j.at("dim").get<int>();
        spec.num_classes = j.at("classes").get<int>();
        for (const auto& jc : j.at("components")) {
            SyntheticComponent c;
            c.group = jc.value("group", "all");
            c.label = jc.at("label").get<int>();
            c.count = jc.at("count").get<std::int64_t>();
            const auto mean = jc.at("mean").get<std::vector<double>>();
            c.mean = Eigen::Map<const Vector>(mean.data(), static_cast<std::int64_t>(mean.size()));
            const auto cov = jc.at("cov").get<std::vector<std::vector<double>>>();
            c.covariance.resize(static_cast<std::int64_t>(cov.size()),
                                static_cast<std::int64_t>(cov.size()));
            for (std::size_t r = 0; r < cov.size(); ++r) {
                if (cov[r].size() != cov.size())
                    throw config_error("synthetic spec: covariance is not square");
                for (std::size_t cidx = 0; cidx < cov[r].size(); ++cidx)
                    c.covariance(static_cast<std::int64_t>(r), static_cast<std::int64_t>(cidx)) =
                        cov[r][cidx];
            }
            spec.components.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("synthetic spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

SyntheticSpec SyntheticSpec::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("synthetic spec: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

TabularDataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();

    std::int64_t total = 0;
    for (const auto& c : spec.components) total += c.count;

    std::vector<std::string> group_names;
    {
        std::set<std::string> names;
        for (const auto& c : spec.components) names.insert(c.group);
        group_names.assign(names.begin(), names.end());
    }
    auto group_id = [&](const std::string& name) {
        return static_cast<int>(std::find(group_names.begin(), group_names.end(), name) -
                                group_names.begin());
    };

    TabularDataset ds;
    ds.features.resize(total, spec.dim);
    ds.labels.reserve(static_cast<std::size_t>(total));
    ds.groups.reserve(static_cast<std::size_t>(total));
    ds.group_names = group_names;
    for (int k = 0; k < spec.num_classes; ++k) ds.class_names.push_back("c" + std::to_string(k));
    for (int j = 0; j < spec.dim; ++j) ds.feature_names.push_back("f" + std::to_string(j));

    std::int64_t row = 0;
    for (std::size_t ci = 0; ci < spec.components.size(); ++ci) {
        const auto& c = spec.components[ci];
        const Matrix factor =
            sampling_factor(c.covariance, "component " + std::to_string(ci));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ci)));
        Vector z(spec.dim);
        for (std::int64_t s = 0; s < c.count; ++s) {
            for (int j = 0; j < spec.dim; ++j) z(j) = rng.next_normal();
            ds.features.row(row) = (c.mean + factor * z).transpose();
            ds.labels.push_back(c.label);
            ds.groups.push_back(group_id(c.group));
            ++row;
        }
    }

    ds.validate();
    return ds;
}

} // namespace hetmia
