#include "hetmia/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "hetmia/errors.hpp"
#include "hetmia/rng.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

constexpr std::uint64_t kPermutationStream = 0x51;
constexpr std::uint64_t kHoldoutStream = 0x52;
constexpr std::uint64_t kMemberStream = 0x61;
constexpr std::uint64_t kSameStream = 0x62;
constexpr std::uint64_t kThirdStream = 0x63;
constexpr std::uint64_t kOrderStream = 0x64;

Role role_from_string(const std::string& s) {
    if (s == "target") return Role::target;
    if (s == "attacker") return Role::attacker;
    if (s == "third") return Role::third;
    throw config_error("split plan: unknown role '" + s + "'");
}

} // namespace

std::string to_string(SplitStrategy s) {
    return s == SplitStrategy::uniform ? "uniform" : "natural";
}

std::string to_string(Role r) {
    switch (r) {
        case Role::target: return "target";
        case Role::attacker: return "attacker";
        case Role::third: return "third";
    }
    return "target";
}

void SplitPlan::validate() const {
    if (nonmember_third_fraction < 0.0 || nonmember_third_fraction > 1.0)
        throw config_error("split plan: rho must be in [0, 1]");
    if (strategy == SplitStrategy::uniform) {
        if (sizes.has_value() == fractions.has_value())
            throw config_error("split plan: uniform needs exactly one of sizes or fractions");
        if (fractions) {
            double total = 0.0;
            for (const double f : *fractions) {
                if (f <= 0.0) throw config_error("split plan: fractions must be positive");
                total += f;
            }
            if (total > 1.0 + 1e-12)
                throw config_error("split plan: fractions sum to more than 1");
        }
        if (sizes)
            for (const std::int64_t s : *sizes)
                if (s <= 0) throw config_error("split plan: sizes must be positive");
    } else {
        bool has_target = false, has_attacker = false, has_third = false;
        for (const auto& [group, role] : roles) {
            (void)group;
            has_target |= role == Role::target;
            has_attacker |= role == Role::attacker;
            has_third |= role == Role::third;
        }
        if (!has_target || !has_attacker)
            throw config_error("split plan: natural split needs target and attacker roles");
        if (holdout_fraction <= 0.0 || holdout_fraction >= 1.0) {
            if (!(holdout_fraction == 0.0 && nonmember_third_fraction == 1.0))
                throw config_error("split plan: holdout fraction must be in (0, 1)");
        }
        if (nonmember_third_fraction > 0.0 && !has_third)
            throw config_error("split plan: rho > 0 needs a third-role group");
    }
}

SplitOutput uniform_split(const TabularDataset& ds, const SplitPlan& plan) {
    if (plan.strategy != SplitStrategy::uniform)
        throw config_error("uniform_split: plan strategy is not uniform");
    plan.validate();
    const std::int64_t n = ds.rows();

    std::array<std::int64_t, 3> sizes{};
    if (plan.sizes) {
        sizes = *plan.sizes;
    } else {
        for (std::size_t i = 0; i < 3; ++i)
            sizes[i] = static_cast<std::int64_t>(std::floor((*plan.fractions)[i] *
                                                            static_cast<double>(n)));
    }
    for (const std::int64_t s : sizes)
        if (s <= 0) throw data_error("uniform_split: a pool would be empty");
    const std::int64_t total = sizes[0] + sizes[1] + sizes[2];
    if (total > n)
        throw data_error("uniform_split: requested " + std::to_string(total) + " rows, have " +
                         std::to_string(n));

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(mix_seed(plan.seed, kPermutationStream));
    shuffle(perm, rng);

    SplitOutput out;
    out.provenance = plan;
    auto cursor = perm.begin();
    out.attacker_idx.assign(cursor, cursor + sizes[0]);
    cursor += sizes[0];
    out.target_idx.assign(cursor, cursor + sizes[1]);
    cursor += sizes[1];
    out.nonmember_same_idx.assign(cursor, cursor + sizes[2]);
    out.validate(ds);
    return out;
}

SplitOutput natural_split(const TabularDataset& ds, const SplitPlan& plan) {
    if (plan.strategy != SplitStrategy::natural)
        throw config_error("natural_split: plan strategy is not natural");
    plan.validate();
    if (!ds.has_groups()) throw data_error("natural_split: dataset has no groups");

    std::vector<int> target_pool, attacker_pool, third_pool;
    for (const auto& [group, role] : plan.roles) {
        const int gid = ds.group_id(group);
        if (gid < 0) throw data_error("natural_split: group '" + group + "' not in dataset");
        const auto rows = ds.rows_with_group(gid);
        auto* pool = role == Role::target ? &target_pool
                     : role == Role::attacker ? &attacker_pool
                                              : &third_pool;
        pool->insert(pool->end(), rows.begin(), rows.end());
    }
    std::sort(target_pool.begin(), target_pool.end());
    std::sort(attacker_pool.begin(), attacker_pool.end());
    std::sort(third_pool.begin(), third_pool.end());
    if (target_pool.empty()) throw data_error("natural_split: target pool is empty");
    if (attacker_pool.empty()) throw data_error("natural_split: attacker pool is empty");

    // Hold out part of the target-role rows as same-distribution non-members.
    const std::int64_t holdout = static_cast<std::int64_t>(
        std::floor(plan.holdout_fraction * static_cast<double>(target_pool.size())));
    if (plan.nonmember_third_fraction < 1.0 && holdout < 1)
        throw data_error("natural_split: target group too small to hold out non-members");
    if (holdout >= static_cast<std::int64_t>(target_pool.size()))
        throw data_error("natural_split: holdout would consume the whole target group");

    Rng rng(mix_seed(plan.seed, kHoldoutStream));
    shuffle(target_pool, rng);

    SplitOutput out;
    out.provenance = plan;
    out.attacker_idx = attacker_pool;
    out.nonmember_same_idx.assign(target_pool.begin(), target_pool.begin() + holdout);
    out.target_idx.assign(target_pool.begin() + holdout, target_pool.end());
    out.nonmember_third_idx = third_pool;
    std::sort(out.nonmember_same_idx.begin(), out.nonmember_same_idx.end());
    std::sort(out.target_idx.begin(), out.target_idx.end());
    out.validate(ds);
    return out;
}

SplitOutput make_split(const TabularDataset& ds, const SplitPlan& plan) {
    return plan.strategy == SplitStrategy::uniform ? uniform_split(ds, plan)
                                                   : natural_split(ds, plan);
}

void SplitOutput::validate(const TabularDataset& ds) const {
    const std::vector<const std::vector<int>*> pools = {
        &attacker_idx, &target_idx, &nonmember_same_idx, &nonmember_third_idx};
    std::set<int> seen;
    std::size_t total = 0;
    for (const auto* pool : pools) {
        total += pool->size();
        for (const int r : *pool) {
            if (r < 0 || r >= ds.rows())
                throw data_error("split: index " + std::to_string(r) + " out of range");
            seen.insert(r);
        }
    }
    if (seen.size() != total) throw data_error("split: pools are not disjoint");

    if (provenance.strategy == SplitStrategy::natural) {
        auto role_of = [&](int row) {
            const auto it =
                provenance.roles.find(ds.group_names[static_cast<std::size_t>(
                    ds.groups[static_cast<std::size_t>(row)])]);
            return it == provenance.roles.end() ? std::optional<Role>{} : std::optional(it->second);
        };
        for (const int r : attacker_idx)
            if (role_of(r) != Role::attacker) throw data_error("split: attacker row of wrong group");
        for (const int r : target_idx)
            if (role_of(r) != Role::target) throw data_error("split: target row of wrong group");
        for (const int r : nonmember_same_idx)
            if (role_of(r) != Role::target)
                throw data_error("split: same-distribution non-member of wrong group");
        for (const int r : nonmember_third_idx)
            if (role_of(r) != Role::third) throw data_error("split: third-pool row of wrong group");
    }
}

ChallengeSet build_challenge(const SplitOutput& split, const TabularDataset& ds, int per_side,
                             double rho, std::uint64_t seed) {
    if (per_side < 1) throw config_error("challenge: per_side must be >= 1");
    if (rho < 0.0 || rho > 1.0) throw config_error("challenge: rho must be in [0, 1]");

    if (per_side > static_cast<int>(split.target_idx.size()))
        throw data_error("challenge: member pool short by " +
                         std::to_string(per_side - static_cast<int>(split.target_idx.size())) +
                         " (target set has " + std::to_string(split.target_idx.size()) + ")");

    // Round-half-to-even, so sweeps over rho are unbiased.
    const int want_third =
        static_cast<int>(std::nearbyint(rho * static_cast<double>(per_side)));
    const int want_same = per_side - want_third;
    if (want_third > static_cast<int>(split.nonmember_third_idx.size()))
        throw data_error(
            "challenge: third-distribution pool short by " +
            std::to_string(want_third - static_cast<int>(split.nonmember_third_idx.size())));
    if (want_same > static_cast<int>(split.nonmember_same_idx.size()))
        throw data_error(
            "challenge: same-distribution pool short by " +
            std::to_string(want_same - static_cast<int>(split.nonmember_same_idx.size())));

    ChallengeSet challenge;
    auto add_points = [&](const std::vector<int>& pool, int count, bool member,
                          std::uint64_t stream) {
        Rng rng(mix_seed(seed, stream));
        const auto picks = sample_without_replacement(static_cast<int>(pool.size()), count, rng);
        for (const int p : picks) {
            ChallengePoint point;
            point.source_row = pool[static_cast<std::size_t>(p)];
            point.x = ds.features.row(point.source_row).transpose();
            point.y = ds.labels[static_cast<std::size_t>(point.source_row)];
            point.is_member = member;
            challenge.points.push_back(std::move(point));
        }
    };
    add_points(split.target_idx, per_side, true, kMemberStream);
    add_points(split.nonmember_same_idx, want_same, false, kSameStream);
    add_points(split.nonmember_third_idx, want_third, false, kThirdStream);

    Rng order_rng(mix_seed(seed, kOrderStream));
    shuffle(challenge.points, order_rng);

    challenge.member_count = per_side;
    challenge.nonmember_count = per_side;
    return challenge;
}

std::string SplitPlan::to_json() const {
    json j;
    j["strategy"] = to_string(strategy);
    if (sizes) j["sizes"] = {(*sizes)[0], (*sizes)[1], (*sizes)[2]};
    if (fractions) j["fractions"] = {(*fractions)[0], (*fractions)[1], (*fractions)[2]};
    if (!roles.empty()) {
        json jr = json::object();
        for (const auto& [group, role] : roles) jr[group] = to_string(role);
        j["roles"] = std::move(jr);
    }
    j["holdout_fraction"] = holdout_fraction;
    j["nonmember_third_fraction"] = nonmember_third_fraction;
    j["seed"] = seed;
    return j.dump(2);
}

SplitPlan SplitPlan::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("split plan: invalid JSON: ") + e.what());
    }
    SplitPlan plan;
    try {
        const std::string strategy = j.at("strategy").get<std::string>();
        if (strategy == "uniform")
            plan.strategy = SplitStrategy::uniform;
        else if (strategy == "natural")
            plan.strategy = SplitStrategy::natural;
        else
            throw config_error("split plan: unknown strategy '" + strategy + "'");
        if (j.contains("sizes")) {
            const auto v = j.at("sizes").get<std::vector<std::int64_t>>();
            if (v.size() != 3) throw config_error("split plan: sizes needs 3 entries");
            plan.sizes = {v[0], v[1], v[2]};
        }
        if (j.contains("fractions")) {
            const auto v = j.at("fractions").get<std::vector<double>>();
            if (v.size() != 3) throw config_error("split plan: fractions needs 3 entries");
            plan.fractions = {v[0], v[1], v[2]};
        }
        if (j.contains("roles"))
            for (const auto& [group, role] : j.at("roles").items())
                plan.roles[group] = role_from_string(role.get<std::string>());
        plan.holdout_fraction = j.value("holdout_fraction", 0.2);
        plan.nonmember_third_fraction = j.value("nonmember_third_fraction", 0.0);
        plan.seed = j.value("seed", 0ULL);
    } catch (const json::exception& e) {
        throw config_error(std::string("split plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

std::string SplitOutput::to_json() const {
    json j;
    j["plan"] = json::parse(provenance.to_json());
    j["attacker_idx"] = attacker_idx;
    j["target_idx"] = target_idx;
    j["nonmember_same_idx"] = nonmember_same_idx;
    j["nonmember_third_idx"] = nonmember_third_idx;
    return j.dump(2);
}

} // namespace hetmia
