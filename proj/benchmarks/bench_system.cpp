#include <cmath>

#include <benchmark/benchmark.h>

#include "geogasket/dimension.hpp"
#include "geogasket/gasket.hpp"

using namespace geogasket;

namespace {

GeodesicTriangle base_on(const Surface& s) {
    const double R = 0.05;
    return GeodesicTriangle::build(s, {0, R}, {-R * std::sqrt(3.0) / 2, -R / 2}, {R * std::sqrt(3.0) / 2, -R / 2});
}

void BM_BuildSphere(benchmark::State& state) {
    const auto base = base_on(Surface::sphere_unit());
    const int depth = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(TriangleSystem::build(base, depth).cell_count());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>((std::pow(3, depth + 1) - 3) / 2));
}
BENCHMARK(BM_BuildSphere)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_BuildFlat(benchmark::State& state) {
    const auto base = base_on(Surface::euclidean());
    const int depth = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(TriangleSystem::build(base, depth).cell_count());
}
BENCHMARK(BM_BuildFlat)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_BoxDimension(benchmark::State& state) {
    const auto sys = TriangleSystem::build(base_on(Surface::hyperbolic_poincare()), 8);
    for (auto _ : state) benchmark::DoNotOptimize(box_dimension_estimate(sys, 3, 8).slope);
}
BENCHMARK(BM_BoxDimension)->Unit(benchmark::kMillisecond);

void BM_AuditSimilarity(benchmark::State& state) {
    const auto sys = TriangleSystem::build(base_on(Surface::sphere_unit()), 4);
    const auto index = MultiIndex::parse("2131");
    for (auto _ : state) benchmark::DoNotOptimize(audit_similarity(sys, index, 128, 1).max_ratio_deviation);
}
BENCHMARK(BM_AuditSimilarity)->Unit(benchmark::kMicrosecond);

}  // namespace
