#include <benchmark/benchmark.h>

#include "geogasket/dimension.hpp"
#include "geogasket/surface.hpp"

using namespace geogasket;

namespace {

Surface surface_for(int kind) {
    switch (kind) {
        case 0: return Surface::euclidean();
        case 1: return Surface::sphere_unit();
        default: return Surface::hyperbolic_poincare();
    }
}

void BM_LogMap(benchmark::State& state) {
    const Surface s = surface_for(static_cast<int>(state.range(0)));
    const SurfacePoint p{0.05, -0.02}, q{0.12, 0.09};
    for (auto _ : state) benchmark::DoNotOptimize(s.log_map(p, q));
    state.SetLabel(to_string(s.kind()));
}
BENCHMARK(BM_LogMap)->DenseRange(0, 2);

void BM_ExpMap(benchmark::State& state) {
    const Surface s = surface_for(static_cast<int>(state.range(0)));
    const SurfacePoint p{0.05, -0.02};
    const TangentVector w{0.07, 0.11};
    for (auto _ : state) benchmark::DoNotOptimize(s.exp_map(p, w, 1.0));
    state.SetLabel(to_string(s.kind()));
}
BENCHMARK(BM_ExpMap)->DenseRange(1, 2);

void BM_LogMapCustom(benchmark::State& state) {
    // Sphere metric as expressions: interpreted evaluation plus
    // finite-difference Christoffel symbols.
    const Surface s = Surface::custom({-1.0, 1.0, -1.0, 1.0}, Expression::parse("4/(1+u^2+v^2)^2"),
                                      Expression::parse("0"), Expression::parse("4/(1+u^2+v^2)^2"));
    const SurfacePoint p{0.05, -0.02}, q{0.12, 0.09};
    for (auto _ : state) benchmark::DoNotOptimize(s.log_map(p, q));
}
BENCHMARK(BM_LogMapCustom);

void BM_SolveMoran(benchmark::State& state) {
    std::vector<double> r(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.2 + 0.5 * static_cast<double>(i) / static_cast<double>(r.size());
    for (auto _ : state) benchmark::DoNotOptimize(solve_moran(r).s);
}
BENCHMARK(BM_SolveMoran)->Arg(3)->Arg(16)->Arg(256);

}  // namespace
