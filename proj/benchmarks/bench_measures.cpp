#include <benchmark/benchmark.h>

#include "herdlab/measures.hpp"
#include "herdlab/rng.hpp"

using namespace herdlab;

namespace {

EmpiricalMeasure random_cloud(std::uint64_t key, int n, int d) {
    Rng rng(key);
    std::vector<double> flat(static_cast<std::size_t>(n) * d);
    for (auto& v : flat) v = 2.0 * rng.uniform() - 1.0;
    return EmpiricalMeasure(std::move(flat), d);
}

}  // namespace

static void BM_AssignmentW1(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    EmpiricalMeasure mu = random_cloud(1, n, 2);
    EmpiricalMeasure nu = random_cloud(2, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(wasserstein_assignment(mu, nu, 1.0));
    state.SetComplexityN(n);
}
BENCHMARK(BM_AssignmentW1)->RangeMultiplier(2)->Range(16, 512)->Complexity();

static void BM_Sorted1dW1(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    EmpiricalMeasure mu = random_cloud(3, n, 1);
    EmpiricalMeasure nu = random_cloud(4, n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(wasserstein_1d(mu, nu, 1.0));
}
BENCHMARK(BM_Sorted1dW1)->RangeMultiplier(4)->Range(64, 16384);

static void BM_Features(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    EmpiricalMeasure mu = random_cloud(5, n, 2);
    const bool pairwise = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(features(mu.ref(), 10.0, pairwise));
}
BENCHMARK(BM_Features)
    ->Args({256, 0})
    ->Args({256, 1})
    ->Args({2048, 0})
    ->Args({2048, 1});
