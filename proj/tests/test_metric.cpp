#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>

#include "hetmia/errors.hpp"
#include "hetmia/metric.hpp"
#include "hetmia/synthetic.hpp"

#include "test_support.hpp"

using namespace hetmia;

namespace {

GaussianProxy proxy_of(Vector mean, Matrix cov) {
    GaussianProxy p;
    p.mean = std::move(mean);
    p.covariance = std::move(cov);
    p.sample_count = 1000;
    return p;
}

TabularDataset two_class_gaussians(double mean0, double mean1, std::int64_t n,
                                   std::uint64_t seed) {
    SyntheticSpec spec;
    spec.dim = 1;
    spec.num_classes = 2;
    spec.components.push_back({"g", 0, Vector::Constant(1, mean0), Matrix::Identity(1, 1), n});
    spec.components.push_back({"g", 1, Vector::Constant(1, mean1), Matrix::Identity(1, 1), n});
    return gen_synthetic(spec, seed);
}

} // namespace

TEST_CASE("sqrt_spd: identity and diagonal cases") {
    CHECK((sqrt_spd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-12);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const Matrix s = sqrt_spd(d);
    CHECK(s(0, 0) == doctest::Approx(2.0));
    CHECK(s(1, 1) == doctest::Approx(3.0));
    CHECK(std::abs(s(0, 1)) < 1e-12);
}

TEST_CASE("sqrt_spd: [[2,1],[1,2]] via eigenpairs (3,1)") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    const Matrix s = sqrt_spd(m);
    // (sqrt(3)+1)/2 and (sqrt(3)-1)/2
    CHECK(s(0, 0) == doctest::Approx(1.3660254).epsilon(1e-6));
    CHECK(s(0, 1) == doctest::Approx(0.3660254).epsilon(1e-6));
    CHECK((s * s - m).norm() < 1e-10);
    CHECK((s - s.transpose()).norm() == 0.0);
}

TEST_CASE("sqrt_spd: rejects asymmetry and non-finite input") {
    Matrix m(2, 2);
    m << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(sqrt_spd(m), data_error);
    m << 1.0, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(sqrt_spd(m), data_error);
}

TEST_CASE("sqrt_spd: clamps small negative eigenvalues") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1e-14;
    const Matrix s = sqrt_spd(m);
    CHECK(s(1, 1) >= 0.0);
    CHECK(s(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("estimate_proxy: two-point sample and regularization floor") {
    TabularDataset ds;
    ds.features.resize(4, 2);
    // column 0: class-0 samples {0, 2}; column 1 constant
    ds.features << 0.0, 7.0, 2.0, 7.0, 5.0, 7.0, 6.0, 7.0;
    ds.labels = {0, 0, 1, 1};
    ds.feature_names = {"a", "b"};
    ds.class_names = {"c0", "c1"};

    const GaussianProxy p = estimate_proxy(ds, 0);
    CHECK(p.sample_count == 2);
    CHECK(p.mean(0) == doctest::Approx(1.0));
    CHECK(p.mean(1) == doctest::Approx(7.0));
    CHECK(p.covariance(0, 0) == doctest::Approx(2.0 + p.regularization));
    CHECK(p.covariance(1, 1) == doctest::Approx(p.regularization)); // constant column
    CHECK(p.regularization > 0.0);
    // eps = 1e-6 * mean |diag|; diag before regularization is (2, 0)
    CHECK(p.regularization == doctest::Approx(1e-6 * 1.0));
}

TEST_CASE("estimate_proxy: errors name the class") {
    TabularDataset ds;
    ds.features.resize(3, 1);
    ds.features << 0.0, 1.0, 2.0;
    ds.labels = {0, 0, 1};
    ds.feature_names = {"a"};
    ds.class_names = {"c0", "c1"};
    try {
        estimate_proxy(ds, 1);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("class 1") != std::string::npos);
    }
}

TEST_CASE("estimate_proxy: concentration on synthetic N(0, I3)") {
    SyntheticSpec spec;
    spec.dim = 3;
    spec.num_classes = 2;
    spec.components.push_back({"g", 0, Vector::Zero(3), Matrix::Identity(3, 3), 5000});
    spec.components.push_back({"g", 1, Vector::Zero(3), Matrix::Identity(3, 3), 2});
    const TabularDataset ds = gen_synthetic(spec, 21);
    const GaussianProxy p = estimate_proxy(ds, 0);
    CHECK(p.mean.norm() < 0.06);
    CHECK((p.covariance - Matrix::Identity(3, 3)).norm() < 0.15);
}

TEST_CASE("w2_gaussian: identity of indiscernibles and 1-D closed form") {
    const GaussianProxy p = proxy_of(Vector::Zero(1), Matrix::Identity(1, 1));
    CHECK(w2_gaussian(p, p) == 0.0);
    const GaussianProxy q = proxy_of(Vector::Constant(1, 3.0), Matrix::Identity(1, 1));
    CHECK(w2_gaussian(p, q) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("w2_gaussian: 2-D commuting case equals sqrt(2)") {
    const GaussianProxy p = proxy_of(Vector::Zero(2), Matrix::Identity(2, 2));
    Matrix c(2, 2);
    c << 4.0, 0.0, 0.0, 1.0;
    Vector m(2);
    m << 1.0, 0.0;
    const GaussianProxy q = proxy_of(m, c);
    CHECK(w2_gaussian(p, q) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("w2_gaussian: dimension mismatch") {
    const GaussianProxy p = proxy_of(Vector::Zero(1), Matrix::Identity(1, 1));
    const GaussianProxy q = proxy_of(Vector::Zero(2), Matrix::Identity(2, 2));
    CHECK_THROWS_AS(w2_gaussian(p, q), data_error);
}

TEST_CASE("w2_gaussian matches the commuting-covariance oracle") {
    Rng rng(4242);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + static_cast<int>(rng.next_below(5));
        // Random shared eigenbasis from a QR factorization.
        Matrix raw(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) raw(i, j) = rng.next_normal();
        const Matrix basis = Eigen::HouseholderQR<Matrix>(raw).householderQ();
        Vector eig1(d), eig2(d), mean1(d), mean2(d);
        for (int i = 0; i < d; ++i) {
            eig1(i) = 0.2 + 3.0 * rng.next_double();
            eig2(i) = 0.2 + 3.0 * rng.next_double();
            mean1(i) = rng.next_normal();
            mean2(i) = rng.next_normal();
        }
        const GaussianProxy p = proxy_of(mean1, basis * eig1.asDiagonal() * basis.transpose());
        const GaussianProxy q = proxy_of(mean2, basis * eig2.asDiagonal() * basis.transpose());
        const double expected = testsup::commuting_w2(mean1, eig1, mean2, eig2);
        CHECK(w2_gaussian(p, q) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("heterogeneity(A, A) is zero") {
    const TabularDataset ds = two_class_gaussians(0.0, 5.0, 300, 1);
    const HeterogeneityReport report = heterogeneity(ds, ds);
    CHECK(report.average <= 1e-9);
    CHECK(report.per_class_distance.at(0) == 0.0);
}

TEST_CASE("heterogeneity: synthetic shifted class means give D = 0.5") {
    // target: class0 N(0,1), class1 N(5,1); attacker: class0 N(1,1), class1 N(5,1)
    // population distances are 1 and 0, so D = 0.5.
    const TabularDataset target = two_class_gaussians(0.0, 5.0, 5000, 11);
    const TabularDataset attacker = two_class_gaussians(1.0, 5.0, 5000, 22);
    const HeterogeneityReport report = heterogeneity(target, attacker);
    CHECK(report.average == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(report.average - 0.5) < 0.05);
}

TEST_CASE("heterogeneity is bitwise symmetric and nonnegative") {
    const TabularDataset a = two_class_gaussians(0.0, 3.0, 400, 5);
    const TabularDataset b = two_class_gaussians(0.5, 2.5, 350, 6);
    const HeterogeneityReport ab = heterogeneity(a, b);
    const HeterogeneityReport ba = heterogeneity(b, a);
    CHECK(ab.average == ba.average);
    for (const auto& [k, d] : ab.per_class_distance) {
        CHECK(d == ba.per_class_distance.at(k));
        CHECK(d >= 0.0);
    }
    CHECK(ab.per_class_counts.at(0).first == ba.per_class_counts.at(0).second);
}

TEST_CASE("translation sensitivity: shifting one side adds exactly |v|^2 to W2^2") {
    const TabularDataset a = two_class_gaussians(0.0, 4.0, 2000, 9);
    TabularDataset b = a;
    Vector v = Vector::Constant(1, 1.5); // |v| = 1.5
    for (std::int64_t i = 0; i < b.rows(); ++i) b.features.row(i) += v.transpose();
    const HeterogeneityReport base = heterogeneity(a, a);
    const HeterogeneityReport shifted = heterogeneity(a, b);
    const double t2 = v.squaredNorm();
    for (const auto& [k, d2] : shifted.per_class_squared) {
        const double before = base.per_class_squared.at(k);
        CHECK(d2 - before == doctest::Approx(t2).epsilon(1e-6));
    }
}

TEST_CASE("metric decreases on homogeneous halves as n grows") {
    double previous = std::numeric_limits<double>::infinity();
    for (const std::int64_t n : {200, 2000, 20000}) {
        const TabularDataset ds = two_class_gaussians(0.0, 3.0, n, 77);
        std::vector<int> first_half, second_half;
        for (std::int64_t i = 0; i < ds.rows(); ++i)
            (i % 2 == 0 ? first_half : second_half).push_back(static_cast<int>(i));
        const HeterogeneityReport report =
            heterogeneity(ds.select(first_half), ds.select(second_half));
        CHECK(report.average < previous);
        previous = report.average;
    }
}

TEST_CASE("classes missing on one side are skipped and reported") {
    TabularDataset a = two_class_gaussians(0.0, 3.0, 50, 3);
    TabularDataset b = a;
    // Remove class 1 from b.
    const auto keep = b.rows_with_label(0);
    b = b.select(keep);
    b.class_names = a.class_names;
    const HeterogeneityReport report = heterogeneity(a, b);
    CHECK(report.skipped_classes == std::vector<int>{1});
    CHECK(report.per_class_distance.count(1) == 0);
    CHECK(report.per_class_distance.count(0) == 1);

    // No common class at all -> error.
    const TabularDataset only1 = a.select(a.rows_with_label(1));
    CHECK_THROWS_AS(heterogeneity(only1, b), data_error);
}

TEST_CASE("heterogeneity: dimension mismatch is an error") {
    const TabularDataset a = two_class_gaussians(0.0, 3.0, 50, 3);
    SyntheticSpec spec;
    spec.dim = 2;
    spec.num_classes = 2;
    spec.components.push_back({"g", 0, Vector::Zero(2), Matrix::Identity(2, 2), 10});
    spec.components.push_back({"g", 1, Vector::Zero(2), Matrix::Identity(2, 2), 10});
    const TabularDataset b = gen_synthetic(spec, 2);
    CHECK_THROWS_AS(heterogeneity(a, b), data_error);
}

TEST_CASE("report json carries the metric and diagnostics") {
    const TabularDataset a = two_class_gaussians(0.0, 3.0, 100, 8);
    const HeterogeneityReport report = heterogeneity(a, a);
    const std::string json = report.to_json();
    CHECK(json.find("\"average\"") != std::string::npos);
    CHECK(json.find("w2_gaussian") != std::string::npos);
    CHECK(report.summary().find("heterogeneity") != std::string::npos);
}
