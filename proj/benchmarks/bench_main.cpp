#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "stochlog/config.hpp"
#include "stochlog/hypotheses.hpp"
#include "stochlog/montecarlo.hpp"
#include "stochlog/noise.hpp"
#include "stochlog/sde.hpp"

namespace {

using namespace stochlog;

void BM_ExprEval(benchmark::State& state) {
    const CoeffExpr e = builtin_example(3).log_growth_rate();
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e(t));
        t += 1e-3;
    }
}
BENCHMARK(BM_ExprEval);

void BM_NormalDraw(benchmark::State& state) {
    const NormalStream n(42);
    std::uint64_t k = 0;
    for (auto _ : state) benchmark::DoNotOptimize(n(k++));
}
BENCHMARK(BM_NormalDraw);

void BM_WindowIntegral(benchmark::State& state) {
    const CoeffExpr e = builtin_example(1).log_growth_rate();
    for (auto _ : state) benchmark::DoNotOptimize(window_integral(e, 1.0, 2.0 * std::numbers::pi));
}
BENCHMARK(BM_WindowIntegral)->Unit(benchmark::kMicrosecond);

void BM_ScanWindow(benchmark::State& state) {
    const SystemSpec s = builtin_example(1);
    ScanParams p;
    p.scan_end = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(check_H2(s, p));
}
BENCHMARK(BM_ScanWindow)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

// Per-step cost of the log-domain integrator, coefficient table excluded.
void BM_LogEmSteps(benchmark::State& state) {
    const SystemSpec s = builtin_example(1);
    const TimeGrid grid(1e-3, 100.0);
    const CoefficientTable table(s, grid);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        double last = 0.0;
        integrate_log_em(table, 0.5, seed++, [&](std::size_t, double x, double) { last = x; });
        benchmark::DoNotOptimize(last);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.steps()));
}
BENCHMARK(BM_LogEmSteps)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
    const SystemSpec s = builtin_example(1);
    EnsembleConfig cfg;
    cfg.base.t_end = 50.0;
    cfg.probe_times = {10.0, 50.0};
    cfg.n_paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(s, cfg, {1.0, 2.0}));
}
BENCHMARK(BM_Ensemble)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
