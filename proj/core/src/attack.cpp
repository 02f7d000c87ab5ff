#include "hetmia/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hetmia/errors.hpp"
#include "hetmia/rng.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

constexpr std::uint64_t kShadowSplitStream = 0x71;
constexpr std::uint64_t kShadowFlStream = 0x72;
constexpr std::uint64_t kClassifierInitStream = 0x73;
constexpr std::uint64_t kClassifierTrainStream = 0x74;

const RoundSnapshot& snapshot_for_round(std::span<const RoundSnapshot> snapshots, int round) {
    for (const auto& s : snapshots)
        if (s.round == round) return s;
    throw data_error("attack: snapshot for round " + std::to_string(round) + " not available");
}

std::vector<int> resolve_rounds(std::span<const RoundSnapshot> snapshots,
                                const AttackConfig& cfg) {
    if (snapshots.empty()) throw data_error("attack: no snapshots");
    if (cfg.rounds_used.empty()) return {snapshots.back().round};
    return cfg.rounds_used;
}

// argmax with ties to the lowest index
int predicted_class(const Vector& p) {
    int best = 0;
    for (int i = 1; i < p.size(); ++i)
        if (p(i) > p(best)) best = i;
    return best;
}

} // namespace

std::string to_string(AttackFeature f) {
    switch (f) {
        case AttackFeature::prediction_vector: return "prediction_vector";
        case AttackFeature::loss: return "loss";
        case AttackFeature::correctness: return "correctness";
        case AttackFeature::last_layer_grad_norm: return "last_layer_grad_norm";
    }
    return "prediction_vector";
}

void AttackConfig::validate() const {
    if (features.empty()) throw config_error("attack config: feature set is empty");
    if (shadow_split_fraction <= 0.0 || shadow_split_fraction >= 1.0)
        throw config_error("attack config: shadow split fraction must be in (0, 1)");
    if (classifier_hidden < 1) throw config_error("attack config: classifier hidden width < 1");
    shadow_train.validate();
    classifier_train.validate();
}

bool AttackConfig::has(AttackFeature f) const {
    return std::find(features.begin(), features.end(), f) != features.end();
}

int AttackConfig::feature_dim(int num_classes) const {
    int per_round = 0;
    if (has(AttackFeature::prediction_vector)) per_round += num_classes;
    if (has(AttackFeature::loss)) per_round += 1;
    if (has(AttackFeature::correctness)) per_round += 1;
    if (has(AttackFeature::last_layer_grad_norm)) per_round += 1;
    const int rounds = rounds_used.empty() ? 1 : static_cast<int>(rounds_used.size());
    return per_round * rounds;
}

Vector extract_features(std::span<const RoundSnapshot> snapshots, const Vector& x, int y,
                        const AttackConfig& cfg) {
    const auto rounds = resolve_rounds(snapshots, cfg);
    const int k = snapshots[0].global.arch.output;
    if (y < 0 || y >= k)
        throw data_error("attack: label " + std::to_string(y) + " outside [0, " +
                         std::to_string(k) + ")");

    Vector out(cfg.feature_dim(k));
    std::int64_t at = 0;
    for (const int round : rounds) {
        const ModelParams& model = snapshot_for_round(snapshots, round).global;
        const Vector p = predict(model, x);

        if (cfg.has(AttackFeature::prediction_vector)) {
            Vector sorted = p;
            std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<double>());
            out.segment(at, k) = sorted;
            at += k;
        }
        if (cfg.has(AttackFeature::loss)) out(at++) = -std::log(std::max(p(y), 1e-300));
        if (cfg.has(AttackFeature::correctness)) out(at++) = predicted_class(p) == y ? 1.0 : 0.0;
        if (cfg.has(AttackFeature::last_layer_grad_norm)) {
            // d(loss)/d(W_out) = (p - e_y) h^T with h the last hidden
            // activation (the input when there is no hidden layer); the
            // Frobenius norm of that rank-1 matrix is |p - e_y| * |h|.
            Vector delta = p;
            delta(y) -= 1.0;
            Vector h = x;
            for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
                h = (model.layers[l].weights * h + model.layers[l].bias).cwiseMax(0.0);
            out(at++) = delta.norm() * h.norm();
        }
    }
    return out;
}

ShadowAttack train_shadow_attack(const TabularDataset& attacker_ds,
                                 const Architecture& target_arch, const FLConfig& target_fl,
                                 const AttackConfig& cfg) {
    cfg.validate();
    const std::int64_t n = attacker_ds.rows();
    const int member_count =
        static_cast<int>(std::floor(cfg.shadow_split_fraction * static_cast<double>(n)));
    const int nonmember_count = static_cast<int>(n) - member_count;
    if (member_count < 2 || nonmember_count < 2)
        throw data_error("attack: attacker dataset too small to split into shadow members and "
                         "non-members (" +
                         std::to_string(n) + " rows)");

    // Disjoint shadow member / non-member index sets.
    Rng split_rng(mix_seed(cfg.seed, kShadowSplitStream));
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, split_rng);
    const std::vector<int> member_rows(perm.begin(), perm.begin() + member_count);
    const std::vector<int> nonmember_rows(perm.begin() + member_count, perm.end());

    const TabularDataset shadow_members = attacker_ds.select(member_rows);

    // Shadow training mirrors the target pipeline: same architecture, same
    // rounds and local epochs. Centralized shadow = one client.
    FLConfig shadow_fl = target_fl;
    shadow_fl.seed = mix_seed(cfg.seed, kShadowFlStream);
    shadow_fl.local = cfg.shadow_train;
    if (!cfg.shadow_federated) {
        shadow_fl.clients = 1;
        shadow_fl.partition = PartitionStrategy::uniform;
    }
    shadow_fl.clients = std::min<int>(shadow_fl.clients, static_cast<int>(shadow_members.rows()));
    const auto shadow_snapshots = run_rounds(shadow_members, target_arch, shadow_fl);

    // Membership-labeled features from the shadow snapshots.
    const int feat_dim = cfg.feature_dim(target_arch.output);
    Matrix xs(n, feat_dim);
    std::vector<int> ys(static_cast<std::size_t>(n));
    std::int64_t row = 0;
    for (const int r : member_rows) {
        xs.row(row) = extract_features(shadow_snapshots, attacker_ds.features.row(r).transpose(),
                                       attacker_ds.labels[static_cast<std::size_t>(r)], cfg)
                          .transpose();
        ys[static_cast<std::size_t>(row)] = 1;
        ++row;
    }
    for (const int r : nonmember_rows) {
        xs.row(row) = extract_features(shadow_snapshots, attacker_ds.features.row(r).transpose(),
                                       attacker_ds.labels[static_cast<std::size_t>(r)], cfg)
                          .transpose();
        ys[static_cast<std::size_t>(row)] = 0;
        ++row;
    }

    Architecture clf_arch{feat_dim, {cfg.classifier_hidden}, 2};
    const ModelParams clf_init =
        init_model(clf_arch, mix_seed(cfg.seed, kClassifierInitStream));
    TrainConfig clf_cfg = cfg.classifier_train;
    clf_cfg.seed = mix_seed(cfg.seed, kClassifierTrainStream);

    ShadowAttack out;
    out.classifier = train(clf_init, xs, ys, clf_cfg).params;
    out.shadow_features = std::move(xs);
    out.shadow_labels = std::move(ys);
    return out;
}

AttackResult run_attack(const ModelParams& classifier,
                        std::span<const RoundSnapshot> target_snapshots,
                        const ChallengeSet& challenge, const AttackConfig& cfg) {
    if (challenge.points.empty()) throw data_error("attack: empty challenge set");
    if (challenge.member_count != challenge.nonmember_count)
        throw data_error("attack: challenge set is not balanced");

    AttackResult result;
    result.config = cfg;
    result.seed = cfg.seed;
    for (const auto& point : challenge.points) {
        const Vector features = extract_features(target_snapshots, point.x, point.y, cfg);
        if (features.size() != classifier.arch.input)
            throw data_error("attack: classifier expects " +
                             std::to_string(classifier.arch.input) + " features, got " +
                             std::to_string(features.size()));
        const double score = predict(classifier, features)(1); // P(member)
        const bool predicted_member = score >= 0.5;
        result.scores.push_back(score);
        result.truth.push_back(point.is_member ? 1 : 0);
        if (point.is_member)
            predicted_member ? ++result.tp : ++result.fn;
        else
            predicted_member ? ++result.fp : ++result.tn;
    }
    const std::int64_t total = result.tp + result.fp + result.tn + result.fn;
    result.accuracy = static_cast<double>(result.tp + result.tn) / static_cast<double>(total);
    return result;
}

std::string AttackResult::to_json(bool include_scores) const {
    json j;
    j["accuracy"] = accuracy;
    j["confusion"] = {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}};
    j["seed"] = seed;
    json jc;
    jc["features"] = json::array();
    for (const auto f : config.features) jc["features"].push_back(to_string(f));
    jc["rounds_used"] = config.rounds_used;
    jc["shadow_split_fraction"] = config.shadow_split_fraction;
    jc["shadow_federated"] = config.shadow_federated;
    jc["classifier_hidden"] = config.classifier_hidden;
    j["config"] = std::move(jc);
    if (include_scores) {
        j["scores"] = scores;
        j["truth"] = truth;
    }
    return j.dump(2);
}

std::string AttackResult::scores_csv() const {
    std::ostringstream os;
    os << "index,score,is_member,predicted_member\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        os << i << ',' << scores[i] << ',' << truth[i] << ',' << (scores[i] >= 0.5 ? 1 : 0)
           << '\n';
    return os.str();
}

} // namespace hetmia
