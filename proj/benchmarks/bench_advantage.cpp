#include <benchmark/benchmark.h>

#include "deskrl/advantage.hpp"
#include "deskrl/rng.hpp"

using namespace deskrl;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    Rng rng = seeded_rng(seed, "bench.adv");
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform_real(-1.0, 1.0);
    return v;
}

} // namespace

static void BM_ComputeGae(benchmark::State& state) {
    const auto deltas = random_vec(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        auto adv = advantage::compute_gae(deltas, 1.0, 0.95);
        benchmark::DoNotOptimize(adv);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeGae)->Arg(16)->Arg(256)->Arg(4096);

static void BM_NormalizeBatch(benchmark::State& state) {
    const auto adv = random_vec(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        auto out = advantage::normalize_batch(adv);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NormalizeBatch)->Arg(512)->Arg(8192)->Arg(131072);

static void BM_AdvantageRecord(benchmark::State& state) {
    const std::size_t t_len = static_cast<std::size_t>(state.range(0));
    const auto rewards = random_vec(t_len, 3);
    auto values = random_vec(t_len + 1, 4);
    values.back() = 0.0;
    for (auto _ : state) {
        auto rec = advantage::compute_record(rewards, values, 1.0, 1.0);
        benchmark::DoNotOptimize(rec);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AdvantageRecord)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
