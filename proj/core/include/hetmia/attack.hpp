#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetmia/fedavg.hpp"
#include "hetmia/splitting.hpp"

namespace hetmia {

enum class AttackFeature { prediction_vector, loss, correctness, last_layer_grad_norm };

std::string to_string(AttackFeature f);

struct AttackConfig {
    // Feature layout per used round: prediction vector sorted descending
    // (K values) | cross-entropy loss | correctness bit | gradient norm.
    // Disabled features are omitted from the layout.
    std::vector<AttackFeature> features = {
        AttackFeature::prediction_vector,
        AttackFeature::loss,
        AttackFeature::correctness,
        AttackFeature::last_layer_grad_norm,
    };
    std::vector<int> rounds_used; // round numbers; empty means final round only

    double shadow_split_fraction = 0.5; // attacker rows that become shadow members
    bool shadow_federated = false;      // true: shadow mimics the target's client count
    int classifier_hidden = 16;
    TrainConfig shadow_train;     // lr / batch / l2 for shadow training
    TrainConfig classifier_train; // the attack classifier's own training
    std::uint64_t seed = 0;

    void validate() const;
    bool has(AttackFeature f) const;
    int feature_dim(int num_classes) const; // per config, all rounds concatenated
};

// Feature vector for one point against a snapshot list. The gradient norm is
// the Euclidean norm of d(loss)/d(output-layer weights); ties in the argmax
// go to the lowest index.
Vector extract_features(std::span<const RoundSnapshot> snapshots, const Vector& x, int y,
                        const AttackConfig& cfg);

struct ShadowAttack {
    ModelParams classifier;
    Matrix shadow_features;         // the classifier's training matrix
    std::vector<int> shadow_labels; // 1 = shadow member, 0 = shadow non-member
};

// Splits the attacker's dataset into shadow members / non-members, trains a
// shadow model with the target's pipeline shape (single client unless
// shadow_federated), and fits the attack classifier on membership-labeled
// shadow features.
ShadowAttack train_shadow_attack(const TabularDataset& attacker_ds, const Architecture& target_arch,
                                 const FLConfig& target_fl, const AttackConfig& cfg);

struct AttackResult {
    double accuracy = 0.0;
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::vector<double> scores;    // P(member) per challenge point
    std::vector<int> truth;        // membership bit per point
    std::uint64_t seed = 0;
    AttackConfig config;

    std::string to_json(bool include_scores = true) const;
    std::string scores_csv() const; // per-point audit dump
};

// Scores every challenge point against the target snapshots; predicted
// member iff score >= 0.5.
AttackResult run_attack(const ModelParams& classifier, std::span<const RoundSnapshot> target_snapshots,
                        const ChallengeSet& challenge, const AttackConfig& cfg);

} // namespace hetmia
