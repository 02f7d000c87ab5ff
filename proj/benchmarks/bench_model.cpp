#include <benchmark/benchmark.h>

#include "hetmia/attack.hpp"
#include "hetmia/fedavg.hpp"
#include "hetmia/model.hpp"
#include "hetmia/rng.hpp"

using namespace hetmia;

namespace {

void make_batch(std::int64_t n, int d, Matrix& xs, std::vector<int>& ys, std::uint64_t seed) {
    Rng rng(seed);
    xs.resize(n, d);
    ys.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) xs(i, j) = rng.next_normal();
        ys[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_below(2));
    }
}

void BM_loss_and_grad(benchmark::State& state) {
    const int d = 32;
    Matrix xs;
    std::vector<int> ys;
    make_batch(state.range(0), d, xs, ys, 11);
    const ModelParams params = init_model(Architecture{d, {32}, 2}, 1);
    ModelGrad grad;
    for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(params, xs, ys, 0.0, &grad));
}
BENCHMARK(BM_loss_and_grad)->Arg(32)->Arg(256);

void BM_train_epoch(benchmark::State& state) {
    const int d = 32;
    Matrix xs;
    std::vector<int> ys;
    make_batch(200, d, xs, ys, 13);
    const ModelParams start = init_model(Architecture{d, {32}, 2}, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 1;
    cfg.batch_size = 16;
    cfg.seed = 3;
    for (auto _ : state) benchmark::DoNotOptimize(train(start, xs, ys, cfg));
}
BENCHMARK(BM_train_epoch);

void BM_extract_features(benchmark::State& state) {
    const int d = 32;
    const ModelParams model = init_model(Architecture{d, {32}, 2}, 4);
    const std::vector<RoundSnapshot> snaps = {{1, model, {100}}};
    AttackConfig cfg;
    cfg.shadow_train.learning_rate = 0.1;
    cfg.classifier_train.learning_rate = 0.1;
    Rng rng(5);
    Vector x(d);
    for (int j = 0; j < d; ++j) x(j) = rng.next_normal();
    for (auto _ : state) benchmark::DoNotOptimize(extract_features(snaps, x, 1, cfg));
}
BENCHMARK(BM_extract_features);

} // namespace
