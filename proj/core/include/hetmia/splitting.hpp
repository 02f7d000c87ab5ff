#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetmia/dataset.hpp"

namespace hetmia {

enum class SplitStrategy { uniform, natural };
enum class Role { target, attacker, third };

std::string to_string(SplitStrategy s);
std::string to_string(Role r);

struct SplitPlan {
    SplitStrategy strategy = SplitStrategy::uniform;

    // uniform: attacker / target / non-member pool sizes, absolute or as
    // fractions of n (fractions are floored to counts).
    std::optional<std::array<std::int64_t, 3>> sizes;
    std::optional<std::array<double, 3>> fractions;

    // natural: group name -> role. Groups sharing a role are pooled.
    std::map<std::string, Role> roles;
    // Fraction of the target-role rows held out as same-distribution
    // non-members.
    double holdout_fraction = 0.2;

    // rho: fraction of challenge non-members drawn from the third pool.
    // Carried here for provenance; build_challenge takes it explicitly.
    double nonmember_third_fraction = 0.0;

    std::uint64_t seed = 0;

    void validate() const; // throws config_error
    std::string to_json() const;
    static SplitPlan from_json(const std::string& text);
};

struct SplitOutput {
    std::vector<int> attacker_idx;
    std::vector<int> target_idx;
    std::vector<int> nonmember_same_idx;
    std::vector<int> nonmember_third_idx;
    SplitPlan provenance;

    // Pairwise disjointness and, for natural splits, role conformance.
    void validate(const TabularDataset& ds) const; // throws data_error
    std::string to_json() const;
};

SplitOutput uniform_split(const TabularDataset& ds, const SplitPlan& plan);
SplitOutput natural_split(const TabularDataset& ds, const SplitPlan& plan);
SplitOutput make_split(const TabularDataset& ds, const SplitPlan& plan); // dispatch on strategy

struct ChallengePoint {
    Vector x;
    int y = 0;
    bool is_member = false;
    int source_row = -1; // row in the source dataset, for audit
};

// Balanced evaluation set: per_side members sampled from target_idx and
// per_side non-members mixed from the same/third pools per rho.
struct ChallengeSet {
    std::vector<ChallengePoint> points;
    std::int64_t member_count = 0;
    std::int64_t nonmember_count = 0;
};

// rho is rounded to a third-pool count with round-half-to-even. Throws
// data_error naming the pool on any shortfall.
ChallengeSet build_challenge(const SplitOutput& split, const TabularDataset& ds,
                             int per_side, double rho, std::uint64_t seed);

} // namespace hetmia
