// Sampling throughput: one gamma_sample per correction term per Monte Carlo
// draw is the inner loop of every estimate, so steps/second here translates
// directly into wall time per digit of accuracy.

#include <benchmark/benchmark.h>

#include "randomgrids/estimator.hpp"
#include "randomgrids/forest.hpp"
#include "randomgrids/gamma.hpp"
#include "randomgrids/models.hpp"
#include "randomgrids/scheme.hpp"

using namespace rgrids;

static void BM_gamma_sample(benchmark::State& state) {
  ModelSpec m = make_sde_quadratic();
  EulerKernel kernel(m);
  std::vector<ForestTerm> f = forest_of(scheme_tree(4, 0, {1, 1}));
  const Tree& tree = f[static_cast<size_t>(state.range(0))].tree;
  const int n = 5;
  RngStream rng(1, 1, 0);
  double acc = 0;
  for (auto _ : state) {
    WeightedStateSet ws = gamma_sample(kernel, tree, n, 0, m.horizon, m.x0, rng);
    for (size_t i = 0; i < ws.count(); ++i)
      acc += static_cast<double>(ws.signs[i]) * m.payoff(ws.state(i));
    benchmark::DoNotOptimize(acc);
  }
  state.SetLabel(tree.to_string());
  state.SetItemsProcessed(state.iterations());
}
// term 1 = single-leaf first correction, 5 = the depth-3 chain with two
// leaves, 8 = the three-leaf star: cheap, middling, expensive.
BENCHMARK(BM_gamma_sample)->Arg(1)->Arg(5)->Arg(8);

static void BM_estimate_fixed_samples(benchmark::State& state) {
  ModelSpec m = make_sde_quadratic();
  EstimateOptions o;
  o.nu = 3;
  o.n = 5;
  o.fixed_samples = 2000;
  for (auto _ : state) {
    o.seed++;  // avoid measuring a warm, identical run
    EstimateResult r = estimate_model(m, "euler", o);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_estimate_fixed_samples)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
