#include <benchmark/benchmark.h>

#include "hetmia/metric.hpp"
#include "hetmia/rng.hpp"
#include "hetmia/synthetic.hpp"

using namespace hetmia;

namespace {

Matrix random_spd(int d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.next_normal();
    return a * a.transpose() / static_cast<double>(d) + 0.1 * Matrix::Identity(d, d);
}

GaussianProxy random_proxy(int d, std::uint64_t seed) {
    Rng rng(seed);
    GaussianProxy p;
    p.mean.resize(d);
    for (int i = 0; i < d; ++i) p.mean(i) = rng.next_normal();
    p.covariance = random_spd(d, seed + 1);
    p.sample_count = 1000;
    return p;
}

TabularDataset synthetic_pair_member(int d, std::int64_t n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.dim = d;
    spec.num_classes = 2;
    spec.components.push_back({"g", 0, Vector::Zero(d), random_spd(d, 3), n});
    spec.components.push_back({"g", 1, Vector::Constant(d, 1.0), random_spd(d, 4), n});
    return gen_synthetic(spec, seed);
}

void BM_sqrt_spd(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const Matrix m = random_spd(d, 42);
    for (auto _ : state) benchmark::DoNotOptimize(sqrt_spd(m));
}
BENCHMARK(BM_sqrt_spd)->Arg(8)->Arg(32)->Arg(64);

void BM_w2_gaussian(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const GaussianProxy p = random_proxy(d, 7);
    const GaussianProxy q = random_proxy(d, 8);
    for (auto _ : state) benchmark::DoNotOptimize(w2_gaussian(p, q));
}
BENCHMARK(BM_w2_gaussian)->Arg(8)->Arg(32)->Arg(64);

void BM_estimate_proxy(benchmark::State& state) {
    const TabularDataset ds = synthetic_pair_member(16, state.range(0), 5);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_proxy(ds, 0));
}
BENCHMARK(BM_estimate_proxy)->Arg(500)->Arg(5000);

void BM_heterogeneity(benchmark::State& state) {
    const TabularDataset a = synthetic_pair_member(16, state.range(0), 5);
    const TabularDataset b = synthetic_pair_member(16, state.range(0), 6);
    for (auto _ : state) benchmark::DoNotOptimize(heterogeneity(a, b));
}
BENCHMARK(BM_heterogeneity)->Arg(500)->Arg(5000);

} // namespace
