#include <benchmark/benchmark.h>

#include <vector>

#include "sake/eval.hpp"
#include "sake/linalg.hpp"
#include "sake/ot_map.hpp"
#include "sake/registry.hpp"
#include "sake/rng.hpp"
#include "sake/steering.hpp"

namespace {

sake::Matrix gaussian(sake::Rng& rng, sake::Index r, sake::Index c) {
    sake::Matrix m(r, c);
    for (sake::Index j = 0; j < c; ++j)
        for (sake::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
    return m;
}

sake::SymMatrix spd(sake::Rng& rng, sake::Index d) {
    const sake::Matrix g = gaussian(rng, d, d);
    return sake::SymMatrix(g * g.transpose() / static_cast<double>(d) + 0.1 * sake::Matrix::Identity(d, d));
}

sake::GaussianSummary summary(sake::Rng& rng, sake::Index d) {
    sake::GaussianSummary s;
    s.mean = gaussian(rng, d, 1).col(0);
    s.cov = spd(rng, d);
    s.count = 100;
    return s;
}

void BM_PsdSqrt(benchmark::State& state) {
    sake::Rng rng(1);
    const auto m = spd(rng, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sake::psd_sqrt(m));
}
BENCHMARK(BM_PsdSqrt)->RangeMultiplier(4)->Range(16, 512)->Unit(benchmark::kMillisecond);

void BM_FitOtMap(benchmark::State& state) {
    sake::Rng rng(2);
    const auto s = summary(rng, state.range(0));
    const auto t = summary(rng, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sake::fit_ot_map(s, t));
}
BENCHMARK(BM_FitOtMap)->RangeMultiplier(4)->Range(16, 512)->Unit(benchmark::kMillisecond);

void BM_Summarize(benchmark::State& state) {
    sake::Rng rng(3);
    const sake::Index d = state.range(0);
    std::vector<sake::Vector> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(gaussian(rng, d, 1).col(0));
    for (auto _ : state) benchmark::DoNotOptimize(sake::summarize(xs));
}
BENCHMARK(BM_Summarize)->RangeMultiplier(4)->Range(16, 512);

void BM_ApplyMap(benchmark::State& state) {
    sake::Rng rng(4);
    const sake::Index d = state.range(0);
    const auto map = sake::LinearMap::optimal_transport(spd(rng, d), gaussian(rng, d, 1).col(0));
    const sake::Vector h = gaussian(rng, d, 1).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(map.apply(h));
}
BENCHMARK(BM_ApplyMap)->RangeMultiplier(4)->Range(16, 512);

// Nearest-centroid lookup over many edits.
void BM_MatchScope(benchmark::State& state) {
    sake::Rng rng(5);
    const sake::Index s = 32;
    sake::Registry reg(4, s);
    for (int i = 0; i < state.range(0); ++i) {
        sake::EditEntry e;
        e.id = "edit-" + std::to_string(i);
        e.spec = sake::EditSpec{"s", "r", "a", "b"};
        e.detector.centroid = 30.0 * gaussian(rng, s, 1).col(0);
        e.map = sake::LinearMap::identity(4);
        reg.add(std::move(e));
    }
    const sake::Vector q = 30.0 * gaussian(rng, s, 1).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(sake::match_scope(reg, q));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MatchScope)->RangeMultiplier(10)->Range(10, 10000);

}  // namespace

BENCHMARK_MAIN();
