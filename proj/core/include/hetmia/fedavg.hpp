#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetmia/dataset.hpp"
#include "hetmia/model.hpp"

namespace hetmia {

enum class PartitionStrategy { uniform, by_group };

// Seed derivation (all through mix_seed):
//   init params        seed = mix_seed(cfg.seed, kInitStream)
//   client partition   seed = mix_seed(cfg.seed, kPartitionStream)
//   client c stream    seed = mix_seed(cfg.seed, kClientStream + c)
// A client's local update in round t runs with epoch_offset
// (t-1) * local_epochs, so round t continues the client's shuffle stream
// where round t-1 left it. With one client this makes R rounds of E local
// epochs bit-identical to one centralized train() of R*E epochs.
inline constexpr std::uint64_t kInitStream = 0x11;
inline constexpr std::uint64_t kPartitionStream = 0x22;
inline constexpr std::uint64_t kClientStream = 0x1000;

struct FLConfig {
    int clients = 4;
    int rounds = 10;
    int local_epochs = 2;
    PartitionStrategy partition = PartitionStrategy::uniform;
    TrainConfig local; // learning rate / batch / l2; epochs and seeds are derived
    std::uint64_t seed = 0;

    void validate() const; // throws config_error
};

struct RoundSnapshot {
    int round = 0; // 1-based, contiguous
    ModelParams global;
    std::vector<std::int64_t> client_sizes;
};

// uniform: seeded near-equal partition, remainder to the first clients
// (sizes 26/26/25/25 for 102 rows over 4). by_group: one client per group
// value present, ascending group id. Throws data_error if a client would be
// empty.
std::vector<std::vector<int>> partition_clients(const TabularDataset& target, const FLConfig& cfg);

// train() starting from the global params; cfg carries the derived seed and
// epoch_offset as documented above.
ModelParams local_update(const ModelParams& global, const Matrix& xs, std::span<const int> ys,
                         const TrainConfig& cfg);

// Coordinate-wise weighted mean, weights n_i / sum(n), summed in client
// index order.
ModelParams aggregate(std::span<const ModelParams> updates, std::span<const std::int64_t> weights);

// rounds of (broadcast, local updates, aggregate); one snapshot per round.
std::vector<RoundSnapshot> run_rounds(const TabularDataset& target, const Architecture& arch,
                                      const FLConfig& cfg);

} // namespace hetmia
