#include <benchmark/benchmark.h>

#include "quadlab/distortion.hpp"
#include "quadlab/dynamics.hpp"
#include "quadlab/exclusion.hpp"
#include "quadlab/partition.hpp"
#include "quadlab/rates.hpp"
#include "quadlab/returns.hpp"

using namespace quadlab;

static void BM_PhaseDerivative(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(phase_derivative(Parameter(1.8), n));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_PhaseDerivative)->RangeMultiplier(10)->Range(10, 100000)->Complexity();

static void BM_ParamDerivative(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(param_derivative(Parameter(1.8), n));
    }
}
BENCHMARK(BM_ParamDerivative)->Arg(40)->Arg(400);

static void BM_Locate(benchmark::State& state) {
    const PartitionConfig cfg(3.0, 0.2);
    double x = 1e-3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(locate(x, cfg));
        x = x * 0.999 + 1e-9;
    }
}
BENCHMARK(BM_Locate);

static void BM_BoundedPeriod(benchmark::State& state) {
    const PartitionConfig cfg(3.0, 0.2);
    const int r = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bounded_period({1.9}, 0, r, cfg, 200));
    }
}
BENCHMARK(BM_BoundedPeriod)->Arg(10)->Arg(25);

static void BM_BoundedDistortion(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(bounded_distortion(Parameter(1.9), 1e-6, 20));
    }
}
BENCHMARK(BM_BoundedDistortion);

static void BM_SummabilityIncrement(benchmark::State& state) {
    const RateSequence rate;
    const long n = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(summability_increment(rate, 0.5, 1, n));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SummabilityIncrement)->Arg(100000)->Arg(10000000);

static void BM_ExclusionRun(benchmark::State& state) {
    RunConfig conf;
    conf.m0 = 6;
    conf.epsilon = 0.01;
    conf.maxGenerations = static_cast<int>(state.range(0));
    conf.sampling.threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run(conf, Parameter(1.6)));
    }
}
BENCHMARK(BM_ExclusionRun)->Args({3, 1})->Args({3, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
