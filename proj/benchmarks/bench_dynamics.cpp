#include <benchmark/benchmark.h>

#include "herdlab/dynamics.hpp"

using namespace herdlab;

namespace {

SystemSpec ou(int n) {
    SystemSpec s;
    s.d = 1;
    s.N = n;
    s.M = 2;
    s.T = 1.0;
    s.p = 4.0;
    s.dt = 0.02;
    Mat a(1);
    a(0, 0) = -1.0;
    s.kernels.H1 = Kernel::linear(a);
    s.kernels.H2 = s.kernels.K1 = s.kernels.K2 = Kernel::zero(1);
    s.noises.sigma_i = NoiseCoefficient::constant(Mat::scaled_identity(1, 0.5));
    s.noises.sigma_c = NoiseCoefficient::zero(1);
    s.initial = InitialLaw::gaussian(Vec{0.0}, Vec{1.0});
    s.herder_start = {Vec{1.0}, Vec{-1.0}};
    s.bounds.L = 2.0;
    s.bounds.Mprime = 1.0;
    s.bounds.ell = 1;
    s.bounds.U_lo = {-1.0};
    s.bounds.U_hi = {1.0};
    return s;
}

}  // namespace

static void BM_SimulateOU(benchmark::State& state) {
    SystemSpec s = ou(static_cast<int>(state.range(0)));
    ControlParams u0 = ControlParams::default_init(s, 1);
    std::uint64_t replica = 0;
    for (auto _ : state) {
        TrajectoryBundle traj = simulate_finite(s, u0, 7, replica++);
        benchmark::DoNotOptimize(traj.herd.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.N) * s.steps());
}
BENCHMARK(BM_SimulateOU)->RangeMultiplier(4)->Range(64, 4096);

static void BM_NonlinearKernelStep(benchmark::State& state) {
    SystemSpec s = ou(static_cast<int>(state.range(0)));
    s.kernels.H1 = Kernel::bounded_radial(1, 1.0, 1.5);  // O(N^2) drift path
    s.T = 0.1;
    s.dt = 0.02;
    ControlParams u0 = ControlParams::default_init(s, 1);
    std::uint64_t replica = 0;
    for (auto _ : state) {
        TrajectoryBundle traj = simulate_finite(s, u0, 7, replica++);
        benchmark::DoNotOptimize(traj.herd.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.N) * s.steps());
}
BENCHMARK(BM_NonlinearKernelStep)->RangeMultiplier(2)->Range(64, 512);

static void BM_SampleNoise(benchmark::State& state) {
    SystemSpec s = ou(static_cast<int>(state.range(0)));
    std::uint64_t replica = 0;
    for (auto _ : state) {
        NoisePaths p = sample_noise_paths(s, 11, replica++);
        benchmark::DoNotOptimize(p.idiosyncratic.data());
    }
}
BENCHMARK(BM_SampleNoise)->Range(256, 4096);
