#include "coinrisk/garch.hpp"

#include <benchmark/benchmark.h>

using namespace coinrisk::garch;

namespace {

GarchParams g11() {
    GarchParams p;
    p.omega = 0.05;
    p.alpha = {0.10};
    p.beta = {0.80};
    return p;
}

void BM_Filter(benchmark::State& state) {
    const auto r = simulate_garch({Variant::Garch}, g11(), static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(filter_variance(r, {Variant::Garch}, g11()));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Filter)->Arg(1000)->Arg(10000);

void BM_Fit(benchmark::State& state) {
    const auto v = static_cast<Variant>(state.range(0));
    const auto r = simulate_garch({Variant::Garch}, g11(), 1000, 2);
    for (auto _ : state) benchmark::DoNotOptimize(fit_garch(r, {v}));
    state.SetLabel(std::string(to_string(v)));
}
BENCHMARK(BM_Fit)->DenseRange(0, 8)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
