#include "hetmia/fedavg.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "hetmia/errors.hpp"
#include "hetmia/rng.hpp"

namespace hetmia {

void FLConfig::validate() const {
    if (clients < 1) throw config_error("fl config: clients must be >= 1");
    if (rounds < 1) throw config_error("fl config: rounds must be >= 1");
    if (local_epochs < 1) throw config_error("fl config: local epochs must be >= 1");
    TrainConfig check = local;
    check.epochs = local_epochs;
    check.validate();
}

std::vector<std::vector<int>> partition_clients(const TabularDataset& target,
                                                const FLConfig& cfg) {
    cfg.validate();
    const std::int64_t n = target.rows();

    if (cfg.partition == PartitionStrategy::by_group) {
        if (!target.has_groups())
            throw data_error("partition: by-group strategy needs group identifiers");
        std::set<int> present(target.groups.begin(), target.groups.end());
        std::vector<std::vector<int>> clients;
        for (const int g : present) clients.push_back(target.rows_with_group(g));
        return clients;
    }

    if (cfg.clients > n)
        throw data_error("partition: " + std::to_string(cfg.clients) + " clients for " +
                         std::to_string(n) + " rows would leave a client empty");

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(mix_seed(cfg.seed, kPartitionStream));
    shuffle(perm, rng);

    // Near-equal sizes, remainder to the first clients: 102 over 4 gives
    // 26/26/25/25. Row order within a client is canonicalized to ascending;
    // only the assignment is random.
    const std::int64_t base = n / cfg.clients;
    const std::int64_t remainder = n % cfg.clients;
    std::vector<std::vector<int>> clients;
    auto cursor = perm.begin();
    for (int c = 0; c < cfg.clients; ++c) {
        const std::int64_t size = base + (c < remainder ? 1 : 0);
        clients.emplace_back(cursor, cursor + size);
        std::sort(clients.back().begin(), clients.back().end());
        cursor += size;
    }
    return clients;
}

ModelParams local_update(const ModelParams& global, const Matrix& xs, std::span<const int> ys,
                         const TrainConfig& cfg) {
    return train(global, xs, ys, cfg).params;
}

ModelParams aggregate(std::span<const ModelParams> updates,
                      std::span<const std::int64_t> weights) {
    if (updates.empty()) throw data_error("aggregate: no updates");
    if (updates.size() != weights.size())
        throw data_error("aggregate: updates/weights size mismatch");
    std::int64_t total = 0;
    for (const std::int64_t w : weights) {
        if (w <= 0) throw data_error("aggregate: weights must be positive");
        total += w;
    }
    for (const auto& update : updates)
        if (!update.same_shape(updates[0])) throw data_error("aggregate: shape mismatch");

    ModelParams result = updates[0];
    for (auto& layer : result.layers) {
        layer.weights.setZero();
        layer.bias.setZero();
    }
    for (std::size_t c = 0; c < updates.size(); ++c) {
        const double w = static_cast<double>(weights[c]) / static_cast<double>(total);
        for (std::size_t l = 0; l < result.layers.size(); ++l) {
            result.layers[l].weights += w * updates[c].layers[l].weights;
            result.layers[l].bias += w * updates[c].layers[l].bias;
        }
    }
    return result;
}

std::vector<RoundSnapshot> run_rounds(const TabularDataset& target, const Architecture& arch,
                                      const FLConfig& cfg) {
    cfg.validate();
    arch.validate();
    const auto clients = partition_clients(target, cfg);

    struct ClientData {
        Matrix xs;
        std::vector<int> ys;
    };
    std::vector<ClientData> data;
    std::vector<std::int64_t> sizes;
    for (const auto& rows : clients) {
        ClientData cd;
        cd.xs.resize(static_cast<std::int64_t>(rows.size()), target.dim());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            cd.xs.row(static_cast<std::int64_t>(i)) = target.features.row(rows[i]);
            cd.ys.push_back(target.labels[static_cast<std::size_t>(rows[i])]);
        }
        sizes.push_back(static_cast<std::int64_t>(rows.size()));
        data.push_back(std::move(cd));
    }

    ModelParams global = init_model(arch, mix_seed(cfg.seed, kInitStream));
    std::vector<RoundSnapshot> snapshots;
    for (int round = 1; round <= cfg.rounds; ++round) {
        std::vector<ModelParams> updates;
        for (std::size_t c = 0; c < data.size(); ++c) {
            TrainConfig local = cfg.local;
            local.epochs = cfg.local_epochs;
            local.seed = mix_seed(cfg.seed, kClientStream + c);
            local.epoch_offset =
                static_cast<std::int64_t>(round - 1) * cfg.local_epochs;
            updates.push_back(local_update(global, data[c].xs, data[c].ys, local));
        }
        global = aggregate(updates, sizes);
        global.validate(); // every snapshot finite
        snapshots.push_back({round, global, sizes});
    }
    return snapshots;
}

} // namespace hetmia
