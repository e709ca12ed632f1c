#include "coinrisk/bubbles.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace coinrisk::bubbles;

namespace {

std::vector<double> walk(std::size_t n) {
    std::mt19937_64 g(3);
    std::normal_distribution<double> z;
    std::vector<double> y(n);
    double s = 0.0;
    for (auto& v : y) v = (s += z(g));
    return y;
}

void BM_Adf(benchmark::State& state) {
    const auto y = walk(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(adf_stat(y));
}
BENCHMARK(BM_Adf)->Arg(400)->Arg(1600);

void BM_Gsadf(benchmark::State& state) {
    const auto y = walk(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gsadf(y, 0.1));
}
BENCHMARK(BM_Gsadf)->Arg(200)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_CriticalValues(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(mc_critical_values(400, 0.1, {}, 200, {0.90, 0.95, 0.99}, 1));
}
BENCHMARK(BM_CriticalValues)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
