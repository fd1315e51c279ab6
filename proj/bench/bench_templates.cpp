// Serial reference vs OpenMP template construction. The work per residue is
// tiny, so this mostly measures how well the dynamic schedule amortizes GMP
// allocation churn across threads.
#include <benchmark/benchmark.h>

#include "collatz/templates.hpp"

using namespace collatz;

static void BM_TemplateSerial(benchmark::State& state) {
    const auto step = static_cast<unsigned long>(state.range(0));
    for (auto _ : state) {
        Template t = build_template_serial(step);
        benchmark::DoNotOptimize(t.unreached_count);
    }
}

static void BM_TemplateParallel(benchmark::State& state) {
    const auto step = static_cast<unsigned long>(state.range(0));
    for (auto _ : state) {
        Template t = build_template(step);
        benchmark::DoNotOptimize(t.unreached_count);
    }
}

BENCHMARK(BM_TemplateSerial)->DenseRange(8, 12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TemplateParallel)->DenseRange(8, 12)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
