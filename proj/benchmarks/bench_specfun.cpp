#include <benchmark/benchmark.h>

#include <cmath>

#include "bfvar/one_sample.hpp"
#include "bfvar/specfun.hpp"
#include "bfvar/two_sample.hpp"

using namespace bfvar;

static void BM_Log2F1Series(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(specfun::log_2f1(3.5, 2.0, 7.25, 0.6));
}
BENCHMARK(BM_Log2F1Series);

static void BM_Log2F1Large(benchmark::State& st) {
    const double n = static_cast<double>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(specfun::log_2f1(n, n / 2 + 0.25, 1.5 * n, 0.9));
}
BENCHMARK(BM_Log2F1Large)->RangeMultiplier(10)->Range(100, 1000000);

static void BM_TricomiU(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(specfun::log_tricomi_u(10.25, -5.5, 0.3));
}
BENCHMARK(BM_TricomiU);

static void BM_TwoSampleBF(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const GroupStats a{n, 0.8 * static_cast<double>(n)}, b{n, 1.0 * static_cast<double>(n)};
    for (auto _ : st) benchmark::DoNotOptimize(two_sample::log_bf10(a, b, PriorSpec{0.5, 0.5}).log_bf10);
}
BENCHMARK(BM_TwoSampleBF)->RangeMultiplier(10)->Range(10, 10000000);

static void BM_DirectedBF(benchmark::State& st) {
    const GroupStats a{990, 990 * 0.89 * 0.89}, b{990, 990 * 0.98 * 0.98};
    for (auto _ : st)
        benchmark::DoNotOptimize(
            two_sample::log_bf_directed(a, b, PriorSpec{0.5, 0.5}, PointNull{}, {1.0, INFINITY}).log_bf10);
}
BENCHMARK(BM_DirectedBF);

static void BM_OneSampleBF(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(one_sample::log_bf10_one({200, 150.0, 1.0}, 0.5).log_bf10);
}
BENCHMARK(BM_OneSampleBF);

BENCHMARK_MAIN();
