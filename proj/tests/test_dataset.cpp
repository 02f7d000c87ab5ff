#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hetmia/dataset.hpp"
#include "hetmia/errors.hpp"
#include "hetmia/synthetic.hpp"

#include "test_support.hpp"

using namespace hetmia;

namespace {

Schema tiny_schema() {
    Schema s;
    s.columns = {{"age", ColumnKind::numeric, {}},
                 {"sex", ColumnKind::categorical, {}},
                 {"note", ColumnKind::drop, {}}};
    s.label_column = "score";
    s.label_rule.kind = LabelRule::Kind::threshold;
    s.label_rule.op = ">=";
    s.label_rule.threshold = 10.0;
    s.positive_label_name = "pass";
    s.group_column = "site";
    return s;
}

const char* kTinyCsv =
    "age,sex,note,score,site\n"
    "15,F,x,12,GP\n"
    "16,M,y,8,GP\n"
    "17,F,z,14,MS\n"
    "18,M,w,9,MS\n";

} // namespace

TEST_CASE("read_csv applies schema, label rule and groups") {
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "tiny.csv", kTinyCsv);
    const RawTable raw = read_csv(dir / "tiny.csv", tiny_schema());
    CHECK(raw.rows() == 4);
    CHECK(raw.num_classes() == 2);
    CHECK(raw.labels == std::vector<int>{1, 0, 1, 0});
    CHECK(raw.group_names == std::vector<std::string>{"GP", "MS"});
    CHECK(raw.groups == std::vector<int>{0, 0, 1, 1});
    CHECK(raw.columns.size() == 2); // note dropped, score/site not features
    CHECK(raw.class_names == std::vector<std::string>{"not_pass", "pass"});
}

TEST_CASE("rows with missing values in used columns are dropped and counted") {
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "missing.csv",
                        "age,sex,note,score,site\n"
                        "15,F,x,12,GP\n"
                        "16,,y,8,GP\n"
                        "17,F,?,14,MS\n"); // missing in a dropped column is fine
    const RawTable raw = read_csv(dir / "missing.csv", tiny_schema());
    CHECK(raw.rows() == 2);
    CHECK(raw.dropped_rows == 1);
}

TEST_CASE("schema errors name the offending column") {
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "nocol.csv", "age,note,score,site\n15,x,12,GP\n");
    try {
        read_csv(dir / "nocol.csv", tiny_schema());
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("sex") != std::string::npos);
    }
}

TEST_CASE("unparseable numeric cell reports the row") {
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "bad.csv",
                        "age,sex,note,score,site\n15,F,x,12,GP\nabc,M,y,8,GP\n");
    try {
        read_csv(dir / "bad.csv", tiny_schema());
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("empty result is fatal") {
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "empty.csv", "age,sex,note,score,site\n15,,x,12,GP\n");
    CHECK_THROWS_AS(read_csv(dir / "empty.csv", tiny_schema()), data_error);
}

TEST_CASE("rfc4180 quoting: embedded commas, quotes and newlines") {
    Schema s;
    s.columns = {{"name", ColumnKind::categorical, {}}};
    s.label_column = "y";
    s.label_rule.threshold = 1.0;
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "quoted.csv",
                        "name,y\n\"a,b\",1\n\"say \"\"hi\"\"\",0\n\"two\nlines\",1\n");
    const RawTable raw = read_csv(dir / "quoted.csv", s);
    CHECK(raw.rows() == 3);
    const auto& col = std::get<RawTable::CategoricalColumn>(raw.columns[0]);
    CHECK(col.vocabulary == std::vector<std::string>{"a,b", "say \"hi\"", "two\nlines"});
}

TEST_CASE("one-hot expansion sums to 1 per row, schema then category order") {
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "tiny.csv", kTinyCsv);
    const TabularDataset ds = load_csv(dir / "tiny.csv", tiny_schema());
    CHECK(ds.dim() == 3); // age + sex=F + sex=M
    CHECK(ds.feature_names == std::vector<std::string>{"age", "sex=F", "sex=M"});
    for (std::int64_t i = 0; i < ds.rows(); ++i)
        CHECK(ds.features(i, 1) + ds.features(i, 2) == doctest::Approx(1.0));
    ds.validate();
}

TEST_CASE("standardization: column {0,2} maps to {-1,+1} (population variance)") {
    RawTable raw;
    raw.columns.push_back(RawTable::NumericColumn{"v", {0.0, 2.0}});
    raw.labels = {0, 1};
    raw.class_names = {"a", "b"};
    const TabularDataset ds = preprocess(raw, {.standardize = true});
    CHECK(ds.features(0, 0) == doctest::Approx(-1.0));
    CHECK(ds.features(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("standardize off preserves raw magnitudes") {
    RawTable raw;
    raw.columns.push_back(RawTable::NumericColumn{"chol", {204.0, 312.0, 398.0}});
    raw.labels = {0, 1, 0};
    raw.class_names = {"a", "b"};
    const TabularDataset ds = preprocess(raw, {.standardize = false});
    CHECK(ds.features(0, 0) == 204.0);
    CHECK(ds.features(2, 0) == 398.0);
}

TEST_CASE("preprocess is idempotent on its own output without standardization") {
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "tiny.csv", kTinyCsv);
    const TabularDataset once = load_csv(dir / "tiny.csv", tiny_schema());
    RawTable again;
    for (std::int64_t j = 0; j < once.dim(); ++j) {
        RawTable::NumericColumn col;
        col.name = once.feature_names[static_cast<std::size_t>(j)];
        for (std::int64_t i = 0; i < once.rows(); ++i) col.values.push_back(once.features(i, j));
        again.columns.emplace_back(std::move(col));
    }
    again.labels = once.labels;
    again.class_names = once.class_names;
    again.groups = once.groups;
    again.group_names = once.group_names;
    const TabularDataset twice = preprocess(again, {.standardize = false});
    CHECK(twice.features == once.features);
    CHECK(twice.feature_names == once.feature_names);
}

TEST_CASE("feature dimension depends on the declared vocabulary, not the rows given") {
    Schema s;
    s.columns = {{"color", ColumnKind::categorical, {"red", "green", "blue"}}};
    s.label_column = "y";
    s.label_rule.threshold = 1.0;
    const auto dir = testsup::temp_dir("dataset");
    testsup::write_file(dir / "sub.csv", "color,y\nred,1\nblue,0\n");
    const TabularDataset ds = load_csv(dir / "sub.csv", s);
    CHECK(ds.dim() == 3); // green column exists even though unseen
    CHECK(ds.feature_names[1] == "color=green");
    testsup::write_file(dir / "unseen.csv", "color,y\nred,1\npink,0\n");
    CHECK_THROWS_AS(load_csv(dir / "unseen.csv", s), data_error);
}

TEST_CASE("gen_synthetic: sample means near spec means") {
    SyntheticSpec spec;
    spec.dim = 1;
    spec.num_classes = 2;
    spec.components.push_back({"all", 0, Vector::Constant(1, 0.0), Matrix::Identity(1, 1), 5000});
    spec.components.push_back({"all", 1, Vector::Constant(1, 5.0), Matrix::Identity(1, 1), 5000});
    const TabularDataset ds = gen_synthetic(spec, 7);
    double m0 = 0.0, m1 = 0.0;
    for (std::int64_t i = 0; i < ds.rows(); ++i)
        (ds.labels[static_cast<std::size_t>(i)] == 0 ? m0 : m1) += ds.features(i, 0);
    m0 /= 5000.0;
    m1 /= 5000.0;
    CHECK(std::abs(m0 - 0.0) < 0.05); // 3+ sigma of the standard error 1/sqrt(5000)
    CHECK(std::abs(m1 - 5.0) < 0.05);
}

TEST_CASE("gen_synthetic: zero-variance component is exactly constant") {
    SyntheticSpec spec;
    spec.dim = 1;
    spec.num_classes = 2;
    spec.components.push_back({"all", 0, Vector::Constant(1, 3.0), Matrix::Zero(1, 1), 10});
    spec.components.push_back({"all", 1, Vector::Constant(1, 0.0), Matrix::Identity(1, 1), 10});
    const TabularDataset ds = gen_synthetic(spec, 3);
    for (std::int64_t i = 0; i < 10; ++i) CHECK(ds.features(i, 0) == 3.0);
}

TEST_CASE("gen_synthetic: same seed gives bit-identical data, non-PSD rejected") {
    SyntheticSpec spec;
    spec.dim = 2;
    spec.num_classes = 2;
    Matrix cov(2, 2);
    cov << 2.0, 0.3, 0.3, 1.0;
    spec.components.push_back({"g", 0, Vector::Zero(2), cov, 50});
    spec.components.push_back({"g", 1, Vector::Constant(2, 1.0), cov, 50});
    const TabularDataset a = gen_synthetic(spec, 99);
    const TabularDataset b = gen_synthetic(spec, 99);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);

    Matrix bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0; // eigenvalues 3, -1
    spec.components[0].covariance = bad;
    CHECK_THROWS_AS(gen_synthetic(spec, 1), config_error);
}

TEST_CASE("gen_synthetic: empirical moments converge to spec parameters") {
    SyntheticSpec spec;
    spec.dim = 3;
    spec.num_classes = 2;
    Matrix cov(3, 3);
    cov << 2.0, 0.5, 0.1, 0.5, 1.5, 0.2, 0.1, 0.2, 1.0;
    Vector mean(3);
    mean << 1.0, -2.0, 0.5;
    spec.components.push_back({"g", 0, mean, cov, 5000});
    spec.components.push_back({"g", 1, Vector::Zero(3), Matrix::Identity(3, 3), 5000});
    const TabularDataset ds = gen_synthetic(spec, 11);

    Matrix rows(5000, 3);
    std::int64_t at = 0;
    for (std::int64_t i = 0; i < ds.rows(); ++i)
        if (ds.labels[static_cast<std::size_t>(i)] == 0) rows.row(at++) = ds.features.row(i);
    REQUIRE(at == 5000);
    const Vector emp_mean = rows.colwise().mean().transpose();
    const Matrix centered = rows.rowwise() - emp_mean.transpose();
    const Matrix emp_cov = centered.transpose() * centered / 4999.0;
    CHECK((emp_mean - mean).norm() / mean.norm() < 0.10);
    CHECK((emp_cov - cov).norm() / cov.norm() < 0.10);
}

TEST_CASE("save/load round trip") {
    SyntheticSpec spec;
    spec.dim = 2;
    spec.num_classes = 2;
    spec.components.push_back({"a", 0, Vector::Zero(2), Matrix::Identity(2, 2), 20});
    spec.components.push_back({"b", 1, Vector::Constant(2, 2.0), Matrix::Identity(2, 2), 20});
    const TabularDataset ds = gen_synthetic(spec, 5);
    const auto dir = testsup::temp_dir("dataset");
    ds.save(dir / "round.csv");
    const TabularDataset back = TabularDataset::load(dir / "round.csv");
    CHECK(back.rows() == ds.rows());
    CHECK(back.labels == ds.labels);
    CHECK(back.groups == ds.groups);
    CHECK((back.features - ds.features).cwiseAbs().maxCoeff() < 1e-15);
}
