#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hetmia/dataset.hpp"

namespace hetmia {

// Gaussian with the sample mean and regularized sample covariance of one
// class of one dataset.
struct GaussianProxy {
    Vector mean;
    Matrix covariance; // symmetrized, plus eps * I
    std::int64_t sample_count = 0;
    double regularization = 0.0; // the eps actually added
};

// Symmetric PSD square root via eigendecomposition; negative eigenvalues are
// clamped to zero. Throws data_error on asymmetry or non-finite entries.
Matrix sqrt_spd(const Matrix& m);

// Sample mean and (n-1)-denominator covariance of the rows with `label`,
// symmetrized and regularized with eps = 1e-6 * max(mean |diag|, 1e-12).
GaussianProxy estimate_proxy(const TabularDataset& ds, int label);

// Closed-form 2-Wasserstein distance between Gaussians:
//   W2^2 = |m_p - m_q|^2 + tr(C_p + C_q - 2 (C_p^1/2 C_q C_p^1/2)^1/2)
// The trace term is clamped at zero before the outer square root. Arguments
// are ordered canonically first, so the result is bitwise symmetric.
double w2_gaussian(const GaussianProxy& p, const GaussianProxy& q);
double w2_gaussian_squared(const GaussianProxy& p, const GaussianProxy& q);

struct HeterogeneityReport {
    std::map<int, double> per_class_distance;
    std::map<int, double> per_class_squared; // diagnostic: W2^2 per class
    std::map<int, std::pair<std::int64_t, std::int64_t>> per_class_counts;
    std::vector<int> skipped_classes;    // < 2 samples on one side, or one-sided
    std::vector<int> low_sample_classes; // fewer samples than dimensions on a side
    double average = 0.0;                // the metric: mean W2 over included classes
    double average_squared = 0.0;
    std::string base_distance_name = "w2_gaussian";

    std::string to_json() const;
    std::string summary() const; // one human-readable line
};

// Per-class Gaussian-proxy W2, averaged over the classes present with at
// least 2 samples on both sides (ascending label order). Symmetric in its
// arguments; bitwise so for the distances.
HeterogeneityReport heterogeneity(const TabularDataset& a, const TabularDataset& b);

} // namespace hetmia
