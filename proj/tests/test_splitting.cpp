#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "hetmia/errors.hpp"
#include "hetmia/metric.hpp"
#include "hetmia/splitting.hpp"
#include "hetmia/synthetic.hpp"

#include "test_support.hpp"

using namespace hetmia;

namespace {

TabularDataset grouped_dataset(std::int64_t per_group, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.dim = 2;
    spec.num_classes = 2;
    for (const std::string group : {"A", "B", "C"}) {
        const double shift = group == "A" ? 0.0 : group == "B" ? 2.0 : 5.0;
        spec.components.push_back(
            {group, 0, Vector::Constant(2, shift), Matrix::Identity(2, 2), per_group / 2});
        spec.components.push_back(
            {group, 1, Vector::Constant(2, shift + 1.0), Matrix::Identity(2, 2), per_group / 2});
    }
    return gen_synthetic(spec, seed);
}

SplitPlan uniform_plan(std::int64_t a, std::int64_t t, std::int64_t nm, std::uint64_t seed) {
    SplitPlan plan;
    plan.strategy = SplitStrategy::uniform;
    plan.sizes = {a, t, nm};
    plan.seed = seed;
    return plan;
}

SplitPlan natural_plan(std::uint64_t seed) {
    SplitPlan plan;
    plan.strategy = SplitStrategy::natural;
    plan.roles = {{"A", Role::target}, {"B", Role::attacker}, {"C", Role::third}};
    plan.holdout_fraction = 0.2;
    plan.nonmember_third_fraction = 0.5;
    plan.seed = seed;
    return plan;
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("uniform split partitions disjointly with requested sizes") {
    const TabularDataset ds = grouped_dataset(34, 1); // 102 rows
    SplitPlan plan = uniform_plan(40, 40, 20, 7);
    const SplitOutput out = uniform_split(ds, plan);
    CHECK(out.attacker_idx.size() == 40);
    CHECK(out.target_idx.size() == 40);
    CHECK(out.nonmember_same_idx.size() == 20);
    CHECK(out.nonmember_third_idx.empty());
    std::set<int> all;
    for (const auto* pool : {&out.attacker_idx, &out.target_idx, &out.nonmember_same_idx})
        for (const int r : *pool) all.insert(r);
    CHECK(all.size() == 100);
}

TEST_CASE("uniform split: determinism and infeasible sizes") {
    const TabularDataset ds = grouped_dataset(34, 1);
    const SplitOutput a = uniform_split(ds, uniform_plan(40, 40, 20, 9));
    const SplitOutput b = uniform_split(ds, uniform_plan(40, 40, 20, 9));
    CHECK(a.attacker_idx == b.attacker_idx);
    CHECK(a.target_idx == b.target_idx);
    CHECK(a.nonmember_same_idx == b.nonmember_same_idx);

    CHECK_THROWS_AS(uniform_split(ds, uniform_plan(60, 60, 20, 1)), data_error);
    CHECK_THROWS_AS(uniform_split(ds, uniform_plan(0, 40, 20, 1)), config_error);
}

TEST_CASE("uniform split accepts fractions") {
    const TabularDataset ds = grouped_dataset(34, 2);
    SplitPlan plan;
    plan.strategy = SplitStrategy::uniform;
    plan.fractions = {0.4, 0.4, 0.2};
    plan.seed = 3;
    const SplitOutput out = uniform_split(ds, plan);
    CHECK(out.attacker_idx.size() == 40); // floor(0.4 * 102)
    CHECK(out.nonmember_same_idx.size() == 20);
}

TEST_CASE("natural split assigns whole groups to roles") {
    const TabularDataset ds = grouped_dataset(40, 4); // A/B/C x 40
    const SplitOutput out = natural_split(ds, natural_plan(11));

    const auto groups_of = [&](const std::vector<int>& rows) {
        std::set<int> gs;
        for (const int r : rows) gs.insert(ds.groups[static_cast<std::size_t>(r)]);
        return gs;
    };
    CHECK(out.attacker_idx.size() == 40); // all of B
    CHECK(groups_of(out.attacker_idx) == std::set<int>{ds.group_id("B")});
    CHECK(out.target_idx.size() == 32); // 80% of A
    CHECK(out.nonmember_same_idx.size() == 8);
    CHECK(groups_of(out.target_idx) == std::set<int>{ds.group_id("A")});
    CHECK(groups_of(out.nonmember_same_idx) == std::set<int>{ds.group_id("A")});
    CHECK(out.nonmember_third_idx.size() == 40); // all of C
    CHECK(groups_of(out.nonmember_third_idx) == std::set<int>{ds.group_id("C")});
}

TEST_CASE("natural split: absent group and missing roles are errors") {
    const TabularDataset ds = grouped_dataset(40, 4);
    SplitPlan plan = natural_plan(1);
    plan.roles["XX"] = Role::third;
    CHECK_THROWS_AS(natural_split(ds, plan), data_error);

    SplitPlan no_attacker;
    no_attacker.strategy = SplitStrategy::natural;
    no_attacker.roles = {{"A", Role::target}};
    CHECK_THROWS_AS(natural_split(ds, no_attacker), config_error);
}

TEST_CASE("natural split pools groups sharing a role") {
    const TabularDataset ds = grouped_dataset(40, 4);
    SplitPlan plan = natural_plan(2);
    plan.roles = {{"A", Role::target}, {"B", Role::attacker}, {"C", Role::attacker}};
    plan.nonmember_third_fraction = 0.0;
    const SplitOutput out = natural_split(ds, plan);
    CHECK(out.attacker_idx.size() == 80);
}

TEST_CASE("challenge composition follows rho with round-half-even") {
    const TabularDataset ds = grouped_dataset(40, 6);
    const SplitOutput split = natural_split(ds, natural_plan(5));

    const ChallengeSet c0 = build_challenge(split, ds, 8, 0.0, 21);
    CHECK(c0.member_count == 8);
    CHECK(c0.nonmember_count == 8);
    const ChallengeSet c1 = build_challenge(split, ds, 8, 1.0, 21);
    const ChallengeSet cq = build_challenge(split, ds, 8, 0.25, 21);

    const auto third_count = [&](const ChallengeSet& c) {
        std::int64_t n = 0;
        for (const auto& p : c.points)
            if (!p.is_member &&
                ds.groups[static_cast<std::size_t>(p.source_row)] == ds.group_id("C"))
                ++n;
        return n;
    };
    CHECK(third_count(c0) == 0);
    CHECK(third_count(c1) == 8);
    CHECK(third_count(cq) == 2); // 0.25 * 8

    // round-half-to-even: 2.5 -> 2, 7.5 -> 8
    CHECK(third_count(build_challenge(split, ds, 10, 0.25, 21)) == 2);
    CHECK(third_count(build_challenge(split, ds, 10, 0.75, 21)) == 8);
}

TEST_CASE("challenge membership and disjointness invariants") {
    const TabularDataset ds = grouped_dataset(40, 6);
    const SplitOutput split = natural_split(ds, natural_plan(5));
    const ChallengeSet c = build_challenge(split, ds, 8, 0.5, 33);

    const auto target = as_set(split.target_idx);
    const auto same = as_set(split.nonmember_same_idx);
    const auto third = as_set(split.nonmember_third_idx);
    std::int64_t members = 0;
    for (const auto& p : c.points) {
        if (p.is_member) {
            ++members;
            CHECK(target.count(p.source_row) == 1);
        } else {
            CHECK(target.count(p.source_row) == 0);
            CHECK((same.count(p.source_row) == 1 || third.count(p.source_row) == 1));
        }
        CHECK(p.y == ds.labels[static_cast<std::size_t>(p.source_row)]);
    }
    CHECK(members == c.member_count);
    CHECK(c.member_count == c.nonmember_count);
}

TEST_CASE("challenge errors name the short pool") {
    const TabularDataset ds = grouped_dataset(40, 6);
    const SplitOutput split = natural_split(ds, natural_plan(5));
    try {
        build_challenge(split, ds, 9, 0.0, 1); // same-pool has only 8
        FAIL("expected data_error");
    } catch (const data_error& e) {
        const std::string what = e.what();
        CHECK(what.find("same-distribution") != std::string::npos);
        CHECK(what.find("short by 1") != std::string::npos);
    }
    CHECK_THROWS_AS(build_challenge(split, ds, 33, 1.0, 1), data_error); // members short
}

TEST_CASE("splits and challenges are deterministic in (ds, plan, seed)") {
    const TabularDataset ds = grouped_dataset(40, 6);
    const SplitOutput s1 = natural_split(ds, natural_plan(5));
    const SplitOutput s2 = natural_split(ds, natural_plan(5));
    CHECK(s1.target_idx == s2.target_idx);
    const ChallengeSet c1 = build_challenge(s1, ds, 8, 0.5, 12);
    const ChallengeSet c2 = build_challenge(s2, ds, 8, 0.5, 12);
    REQUIRE(c1.points.size() == c2.points.size());
    for (std::size_t i = 0; i < c1.points.size(); ++i) {
        CHECK(c1.points[i].source_row == c2.points[i].source_row);
        CHECK(c1.points[i].is_member == c2.points[i].is_member);
    }
}

TEST_CASE("uniform splits of homogeneous data have vanishing heterogeneity") {
    double previous = std::numeric_limits<double>::infinity();
    for (const std::int64_t per_group : {100, 1000, 10000}) {
        SyntheticSpec spec;
        spec.dim = 2;
        spec.num_classes = 2;
        spec.components.push_back(
            {"g", 0, Vector::Zero(2), Matrix::Identity(2, 2), per_group});
        spec.components.push_back(
            {"g", 1, Vector::Constant(2, 2.0), Matrix::Identity(2, 2), per_group});
        const TabularDataset ds = gen_synthetic(spec, 17);
        const std::int64_t third = ds.rows() / 3;
        const SplitOutput out = uniform_split(ds, uniform_plan(third, third, third, 23));
        const HeterogeneityReport report =
            heterogeneity(ds.select(out.attacker_idx), ds.select(out.target_idx));
        CHECK(report.average < previous);
        previous = report.average;
    }
}

TEST_CASE("split plan json round trip") {
    const SplitPlan plan = natural_plan(77);
    const SplitPlan back = SplitPlan::from_json(plan.to_json());
    CHECK(back.strategy == plan.strategy);
    CHECK(back.roles == plan.roles);
    CHECK(back.holdout_fraction == plan.holdout_fraction);
    CHECK(back.seed == plan.seed);
    const TabularDataset ds = grouped_dataset(40, 6);
    const SplitOutput out = natural_split(ds, plan);
    CHECK(out.to_json().find("attacker_idx") != std::string::npos);
}
