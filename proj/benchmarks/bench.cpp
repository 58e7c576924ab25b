#include <benchmark/benchmark.h>

#include "modone/fourier.hpp"
#include "modone/localstats.hpp"
#include "modone/oscint.hpp"
#include "modone/seqgen.hpp"
#include "modone/window.hpp"

#include <cstdint>

using namespace modone;

namespace {

const PointSet& cached_points(std::uint64_t n) {
    static const PointSet big = frac_parts({7.5, 1.0, 1 << 16}, PrecisionPolicy{}, 1);
    static const PointSet mid = big.prefix(1 << 12);
    return n <= (1 << 12) ? mid : big;
}

void BM_FracParts(benchmark::State& state) {
    const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        const PointSet ps = frac_parts({7.5, 1.0, n}, PrecisionPolicy{}, 1);
        benchmark::DoNotOptimize(ps.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_PairCorrelation(benchmark::State& state) {
    const PointSet& ps = cached_points(static_cast<std::uint64_t>(state.range(0)));
    for (auto _ : state) {
        const CorrelationEstimate est = pair_correlation(ps, -0.5, 0.5, 1);
        benchmark::DoNotOptimize(est.value);
    }
}

void BM_TripleCorrelation(benchmark::State& state) {
    const PointSet& ps = cached_points(1 << 12);
    const Window w = Window::gaussian(1.0, 8.0, 2);
    for (auto _ : state) {
        const CorrelationEstimate est = k_level_correlation(ps, w, 3, 1);
        benchmark::DoNotOptimize(est.value);
    }
}

void BM_ExpSumSpectrum(benchmark::State& state) {
    const SequenceSpec spec{7.5, 1.0, 1 << 12};
    ExpSumEngine engine(spec, PrecisionPolicy{}, 64, 1);
    for (auto _ : state) {
        for (int n = 1; n <= 64; ++n) benchmark::DoNotOptimize(engine.sum(n));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}

void BM_OscillatoryIntegral(benchmark::State& state) {
    const PhaseSpec phase = canonicalize({3.0, -2.0}, {2.0, 5.0}).first;
    const AlphaInterval J{2.0};
    for (auto _ : state) {
        const IntegralResult r = oscillatory_integral(phase, J, 1e-8);
        benchmark::DoNotOptimize(r.value);
    }
}

void BM_GapSandwich(benchmark::State& state) {
    const PointSet& ps = cached_points(1 << 16);
    for (auto _ : state) {
        const SandwichBounds sb = gap_sandwich(ps, 0.5, 2);
        benchmark::DoNotOptimize(sb.lower);
    }
}

}  // namespace

BENCHMARK(BM_FracParts)->Arg(1 << 10)->Arg(1 << 12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairCorrelation)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TripleCorrelation)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpSumSpectrum)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OscillatoryIntegral)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GapSandwich)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
