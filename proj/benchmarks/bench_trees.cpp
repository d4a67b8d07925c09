// Combinatorics throughput: tree construction and forest enumeration gate the
// setup phase of every estimate, and the order-10 forest (29k terms) is the
// largest case exercised anywhere.

#include <benchmark/benchmark.h>

#include "randomgrids/forest.hpp"
#include "randomgrids/scheme.hpp"

using namespace rgrids;

static void BM_scheme_tree(benchmark::State& state) {
  int nu = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scheme_tree(nu, 0, {1, 1}));
}
BENCHMARK(BM_scheme_tree)->Arg(4)->Arg(6)->Arg(10);

static void BM_forest_of(benchmark::State& state) {
  int nu = static_cast<int>(state.range(0));
  Tree t = scheme_tree(nu, 0, {1, 1});
  for (auto _ : state) {
    std::vector<ForestTerm> f = forest_of(t);
    benchmark::DoNotOptimize(f.size());
  }
}
BENCHMARK(BM_forest_of)->Arg(4)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_coefficients_order10(benchmark::State& state) {
  std::vector<ForestTerm> f = forest_of(scheme_tree(10, 0, {1, 1}));
  for (auto _ : state) {
    size_t bytes = 0;
    for (const ForestTerm& term : f) bytes += coefficient_string(term, 10).size();
    benchmark::DoNotOptimize(bytes);
  }
}
BENCHMARK(BM_coefficients_order10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
