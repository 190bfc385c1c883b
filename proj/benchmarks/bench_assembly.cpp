#include <benchmark/benchmark.h>

#include "openbook/discretize.hpp"
#include "openbook/eigensolve.hpp"
#include "support/test_books.hpp"

using namespace openbook;

static void ModeSystemAssembly(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    const OpenBookComplex book = test_support::sphere_book();
    for (auto _ : state) {
        auto sys = build_mode_system(book, 1, nodes);
        benchmark::DoNotOptimize(sys);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(ModeSystemAssembly)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

static void TraceElimination(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    const DiscreteSystem sys = build_mode_system(test_support::sphere_book(), 1, nodes);
    for (auto _ : state) {
        auto red = eliminate_traces(sys);
        benchmark::DoNotOptimize(red);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(TraceElimination)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

static void FullSystemAssembly(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const OpenBookComplex book = test_support::dumbbell_book();
    for (auto _ : state) {
        auto sys = build_full_system(book, n, n);
        benchmark::DoNotOptimize(sys);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(FullSystemAssembly)->RangeMultiplier(2)->Range(16, 64)->Complexity();

static void ShiftInvertLowest(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    const ReducedSystem sys =
        eliminate_traces(build_mode_system(test_support::sphere_book(), 0, nodes));
    SolveOptions opts;
    opts.count = 6;
    opts.tol = 1e-9;
    for (auto _ : state) {
        auto r = lowest_eigenpairs(sys, opts);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(ShiftInvertLowest)->RangeMultiplier(2)->Range(256, 2048);

BENCHMARK_MAIN();
