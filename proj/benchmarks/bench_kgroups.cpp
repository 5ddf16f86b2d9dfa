#include <benchmark/benchmark.h>

#include <vector>

#include "bfvar/hypotheses.hpp"
#include "bfvar/kgroups.hpp"

using namespace bfvar;

namespace {
std::vector<GroupStats> aperture() {
    return {stats_from_sd(117, 5.83, SdDivisor::n), stats_from_sd(171, 8.13, SdDivisor::n),
            stats_from_sd(55, 12.74, SdDivisor::n)};
}
}  // namespace

static void BM_SamplePosterior(benchmark::State& st) {
    kgroups::ChainConfig cfg;
    cfg.draws = static_cast<std::size_t>(st.range(0));
    cfg.parallel = false;
    const auto stats = aperture();
    for (auto _ : st) benchmark::DoNotOptimize(kgroups::sample_posterior(stats, 0.5, cfg, 1).acceptance_rate);
}
BENCHMARK(BM_SamplePosterior)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_Bridge(benchmark::State& st) {
    kgroups::ChainConfig cfg;
    cfg.parallel = false;
    const auto stats = aperture();
    const auto draws = kgroups::sample_posterior(stats, 0.5, cfg, 1);
    for (auto _ : st) benchmark::DoNotOptimize(kgroups::bridge_log_ml(draws, stats, 0.5).log_ml);
}
BENCHMARK(BM_Bridge)->Unit(benchmark::kMillisecond);

static void BM_OrderFraction(benchmark::State& st) {
    const auto k = static_cast<std::size_t>(st.range(0));
    std::string text = "1";
    for (std::size_t i = 2; i <= k; ++i) text += "<" + std::to_string(i);
    const auto spec = parse_hypothesis(text, k);
    for (auto _ : st) benchmark::DoNotOptimize(log_prior_order_fraction(spec));
}
BENCHMARK(BM_OrderFraction)->Arg(6)->Arg(12)->Arg(20);

static void BM_LogBF(benchmark::State& st) {
    kgroups::ChainConfig cfg;
    const auto stats = aperture();
    const auto h1 = parse_hypothesis("1>2>3", 3), h0 = null_spec(3);
    for (auto _ : st) benchmark::DoNotOptimize(kgroups::log_bf(h1, h0, stats, 0.5, cfg, 1).log_bf10);
}
BENCHMARK(BM_LogBF)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
