#include "hetmia/metric.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "hetmia/errors.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

// Lexicographic order over (mean, covariance, sample_count); 0 on equality.
// Used to canonicalize the argument order of w2_gaussian so the distance is
// bitwise symmetric.
int compare_proxies(const GaussianProxy& p, const GaussianProxy& q) {
    if (p.mean.size() != q.mean.size()) return p.mean.size() < q.mean.size() ? -1 : 1;
    for (std::int64_t i = 0; i < p.mean.size(); ++i) {
        if (p.mean(i) < q.mean(i)) return -1;
        if (p.mean(i) > q.mean(i)) return 1;
    }
    for (std::int64_t i = 0; i < p.covariance.rows(); ++i) {
        for (std::int64_t j = 0; j < p.covariance.cols(); ++j) {
            if (p.covariance(i, j) < q.covariance(i, j)) return -1;
            if (p.covariance(i, j) > q.covariance(i, j)) return 1;
        }
    }
    if (p.sample_count != q.sample_count) return p.sample_count < q.sample_count ? -1 : 1;
    return 0;
}

} // namespace

Matrix sqrt_spd(const Matrix& m) {
    if (m.rows() != m.cols()) throw data_error("sqrt_spd: matrix is not square");
    if (!m.allFinite()) throw data_error("sqrt_spd: non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw data_error("sqrt_spd: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success) throw data_error("sqrt_spd: eigendecomposition failed");
    Vector lambda = eig.eigenvalues();
    for (std::int64_t i = 0; i < lambda.size(); ++i)
        lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    Matrix s = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (s + s.transpose());
}

GaussianProxy estimate_proxy(const TabularDataset& ds, int label) {
    const std::int64_t d = ds.dim();
    if (d == 0) throw data_error("estimate_proxy: zero-dimensional dataset");
    const auto rows = ds.rows_with_label(label);
    const std::int64_t n = static_cast<std::int64_t>(rows.size());
    if (n < 2)
        throw data_error("estimate_proxy: class " + std::to_string(label) + " has " +
                         std::to_string(n) + " samples, need at least 2");

    GaussianProxy proxy;
    proxy.sample_count = n;
    proxy.mean = Vector::Zero(d);
    for (const int r : rows) proxy.mean += ds.features.row(r).transpose();
    proxy.mean /= static_cast<double>(n);

    Matrix centered(n, d);
    std::int64_t i = 0;
    for (const int r : rows) centered.row(i++) = ds.features.row(r) - proxy.mean.transpose();
    Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose());

    const double mean_diag = cov.diagonal().cwiseAbs().mean();
    const double eps = 1e-6 * std::max(mean_diag, 1e-12);
    cov.diagonal().array() += eps;

    proxy.covariance = std::move(cov);
    proxy.regularization = eps;
    return proxy;
}

double w2_gaussian_squared(const GaussianProxy& p, const GaussianProxy& q) {
    if (p.mean.size() != q.mean.size())
        throw data_error("w2_gaussian: dimension mismatch (" + std::to_string(p.mean.size()) +
                         " vs " + std::to_string(q.mean.size()) + ")");
    const int order = compare_proxies(p, q);
    if (order == 0) return 0.0;
    const GaussianProxy& a = order < 0 ? p : q;
    const GaussianProxy& b = order < 0 ? q : p;

    const double mean_term = (a.mean - b.mean).squaredNorm();
    const Matrix root_a = sqrt_spd(a.covariance);
    const Matrix cross = sqrt_spd(root_a * b.covariance * root_a);
    const double bures = (a.covariance + b.covariance).trace() - 2.0 * cross.trace();
    return mean_term + std::max(bures, 0.0);
}

double w2_gaussian(const GaussianProxy& p, const GaussianProxy& q) {
    return std::sqrt(w2_gaussian_squared(p, q));
}

HeterogeneityReport heterogeneity(const TabularDataset& a, const TabularDataset& b) {
    if (a.dim() != b.dim())
        throw data_error("heterogeneity: feature dimension mismatch (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");

    std::set<int> labels;
    for (const int y : a.labels) labels.insert(y);
    for (const int y : b.labels) labels.insert(y);

    HeterogeneityReport report;
    double sum = 0.0, sum_sq = 0.0;
    for (const int k : labels) { // std::set iterates ascending
        const std::int64_t na = static_cast<std::int64_t>(a.rows_with_label(k).size());
        const std::int64_t nb = static_cast<std::int64_t>(b.rows_with_label(k).size());
        report.per_class_counts[k] = {na, nb};
        if (na < 2 || nb < 2) {
            report.skipped_classes.push_back(k);
            continue;
        }
        if (na < a.dim() || nb < b.dim()) report.low_sample_classes.push_back(k);
        const GaussianProxy pa = estimate_proxy(a, k);
        const GaussianProxy pb = estimate_proxy(b, k);
        const double d2 = w2_gaussian_squared(pa, pb);
        const double d = std::sqrt(d2);
        report.per_class_distance[k] = d;
        report.per_class_squared[k] = d2;
        sum += d;
        sum_sq += d2;
    }
    if (report.per_class_distance.empty())
        throw data_error("heterogeneity: no class has at least 2 samples on both sides");
    const double count = static_cast<double>(report.per_class_distance.size());
    report.average = sum / count;
    report.average_squared = sum_sq / count;
    return report;
}

std::string HeterogeneityReport::to_json() const {
    json j;
    j["base_distance"] = base_distance_name;
    j["average"] = average;
    j["average_squared"] = average_squared;
    json per_class = json::object();
    for (const auto& [k, d] : per_class_distance) {
        const auto counts = per_class_counts.at(k);
        per_class[std::to_string(k)] = {{"distance", d},
                                        {"squared", per_class_squared.at(k)},
                                        {"count_a", counts.first},
                                        {"count_b", counts.second}};
    }
    j["per_class"] = std::move(per_class);
    j["skipped_classes"] = skipped_classes;
    j["low_sample_classes"] = low_sample_classes;
    return j.dump(2);
}

std::string HeterogeneityReport::summary() const {
    std::ostringstream os;
    os.precision(4);
    os << "heterogeneity D = " << average << " (" << base_distance_name << ", "
       << per_class_distance.size() << " classes";
    if (!skipped_classes.empty()) os << ", " << skipped_classes.size() << " skipped";
    os << ")";
    return os.str();
}

} // namespace hetmia
