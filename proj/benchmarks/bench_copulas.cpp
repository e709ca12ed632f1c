#include "coinrisk/copulas.hpp"

#include <benchmark/benchmark.h>

using namespace coinrisk::copulas;

namespace {

CopulaParams params() {
    CopulaParams p;
    p.rho = 0.4;
    p.nu = 6.0;
    p.pi_plackett = 3.0;
    p.lambda_frank = 4.0;
    p.delta = 1.6;
    p.lam_u = 0.3;
    p.lam_l = 0.2;
    return p;
}

void BM_LogDensity(benchmark::State& state) {
    const auto f = kAllFamilies[static_cast<std::size_t>(state.range(0))];
    const auto p = params();
    double u = 0.013;
    for (auto _ : state) {
        u = u + 0.61803398875 - static_cast<int>(u + 0.61803398875);
        benchmark::DoNotOptimize(copula_log_density(f, p, u, 1.0 - 0.5 * u));
    }
    state.SetLabel(std::string(to_string(f)));
}
BENCHMARK(BM_LogDensity)->DenseRange(0, 6);

void BM_FitStatic(benchmark::State& state) {
    const auto f = kAllFamilies[static_cast<std::size_t>(state.range(0))];
    const auto pair = simulate_copula(Family::Gaussian, params(), 1000, 4);
    for (auto _ : state) benchmark::DoNotOptimize(fit_static_copula(pair, f));
    state.SetLabel(std::string(to_string(f)));
}
BENCHMARK(BM_FitStatic)->DenseRange(0, 6)->Unit(benchmark::kMillisecond);

void BM_FitTimeVarying(benchmark::State& state) {
    const auto pair = simulate_copula(Family::Gaussian, params(), 1000, 5);
    for (auto _ : state) benchmark::DoNotOptimize(fit_tv_copula(pair, Family::Gaussian));
}
BENCHMARK(BM_FitTimeVarying)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
