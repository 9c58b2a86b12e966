#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "geogasket/gasket.hpp"
#include "geogasket/measure.hpp"

using namespace geogasket;

namespace {

void BM_TransportCost(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> supply(n), demand(n), cost(n * n);
    for (auto& x : supply) x = U(rng);
    for (auto& x : demand) x = U(rng);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) a += supply[i], b += demand[i];
    for (auto& x : supply) x /= a;
    for (auto& x : demand) x /= b;
    for (auto& x : cost) x = U(rng);
    for (auto _ : state) benchmark::DoNotOptimize(transport_cost(supply, demand, cost));
}
BENCHMARK(BM_TransportCost)->RangeMultiplier(4)->Range(16, 256)->Unit(benchmark::kMicrosecond);

void BM_Fixpoint(benchmark::State& state) {
    const double R = 0.5;
    const auto base = GeodesicTriangle::build(Surface::euclidean(), {0, R}, {-R * std::sqrt(3.0) / 2, -R / 2},
                                              {R * std::sqrt(3.0) / 2, -R / 2});
    const auto sys = TriangleSystem::build(base, 8);
    const std::vector<double> eq{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto seed = default_seed(sys);
    const int iters = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(pushforward_fixpoint(sys, eq, iters, seed).trace.size());
}
BENCHMARK(BM_Fixpoint)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
