#include <benchmark/benchmark.h>

#include <random>

#include "openbook/conditions.hpp"
#include "support/random_matrices.hpp"

using namespace openbook;

static void CanonicalUnitaryForm(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    const ConditionPair pair =
        pair_from_unitary(CanonicalUnitary::from(test_support::random_unitary(k, rng)));
    for (auto _ : state) {
        auto u = canonical_unitary(pair.sample(0));
        benchmark::DoNotOptimize(u);
    }
}
BENCHMARK(CanonicalUnitaryForm)->RangeMultiplier(2)->Range(2, 16);

static void EllipticityPencil(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::mt19937_64 rng(2);
    const ConditionPair pair =
        pair_from_unitary(CanonicalUnitary::from(test_support::random_unitary(k, rng)));
    for (auto _ : state) {
        auto r = check_ellipticity(pair);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(EllipticityPencil)->RangeMultiplier(2)->Range(2, 16);

static void RowSpaceEquivalence(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::mt19937_64 rng(3);
    const ConditionPair p =
        pair_from_unitary(CanonicalUnitary::from(test_support::random_unitary(k, rng)));
    const Eigen::MatrixXcd g = test_support::random_invertible(k, rng);
    const ConditionPair q = ConditionPair::constant(g * p.sample(0).A, g * p.sample(0).C);
    for (auto _ : state) {
        benchmark::DoNotOptimize(equivalent(p, q));
    }
}
BENCHMARK(RowSpaceEquivalence)->RangeMultiplier(2)->Range(2, 16);
