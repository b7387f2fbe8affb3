// Parallel vs serial episode evaluation, plus the two precomputation kernels.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "sprmab/domains.hpp"
#include "sprmab/occupancy_lp.hpp"
#include "sprmab/policy.hpp"
#include "sprmab/simulator.hpp"
#include "sprmab/whittle.hpp"

using namespace sprmab;

namespace {

Instance cpap_instance(int rho) {
    DomainSpec spec;
    spec.family = Family::Cpap;
    spec.seed = 7;
    return make_instance(spec, Setting{20, 5, 10, rho, 10});
}

void BM_EvaluateParallel(benchmark::State& state) {
    const Instance instance = cpap_instance(static_cast<int>(state.range(0)));
    const SpiPolicy policy(instance);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(instance, policy, 64, 1000).mean);
    state.counters["threads"] = omp_get_max_threads();
}

void BM_EvaluateSerial(benchmark::State& state) {
    const Instance instance = cpap_instance(static_cast<int>(state.range(0)));
    const SpiPolicy policy(instance);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_serial(instance, policy, 64, 1000).mean);
}

void BM_DummyLp(benchmark::State& state) {
    const Instance instance = cpap_instance(10);
    for (auto _ : state) benchmark::DoNotOptimize(upper_bound(instance));
}

void BM_WhittleInfinite(benchmark::State& state) {
    const Instance instance = cpap_instance(10);
    for (auto _ : state) benchmark::DoNotOptimize(whittle_index_infinite(instance.types[0], instance.horizon));
}

}  // namespace

BENCHMARK(BM_EvaluateParallel)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateSerial)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DummyLp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WhittleInfinite)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
