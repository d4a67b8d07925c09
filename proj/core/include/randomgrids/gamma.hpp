#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "randomgrids/kernels.hpp"

namespace rgrids {

// Signed particle family: the branching evaluation of one correction term
// returns 2^(#leaves) end states, each with sign +1 or -1. The term's sample
// value is sum_i sign_i * f(state_i), and the signs cancel pairwise so the
// sum is exactly the alternating coarse/fine telescoping of the term.
struct WeightedStateSet {
  int dim = 1;
  std::vector<double> states;  // row-major count() x dim
  std::vector<int8_t> signs;

  size_t count() const { return signs.size(); }
  std::span<const double> state(size_t i) const {
    return {states.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
  }
  std::span<double> state(size_t i) {
    return {states.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
  }
};

template <class Kernel>
struct RecordedStep {
  long long t_units;    // start, in units of the finest step of the term's grid
  long long dur_units;  // length in the same units
  typename Kernel::Noise noise;
};

template <class Kernel>
struct GammaTrace {
  LabeledTree lt;                          // refinement offsets drawn during the run
  std::vector<RecordedStep<Kernel>> steps; // every elementary noise, with its interval
  WeightedStateSet result;
};

namespace detail {

// Draws noises straight from the kernel; the production path.
template <class Kernel>
struct SamplingSource {
  const Kernel& kernel;
  RngStream& rng;
  int n;

  std::vector<int> order_stats(size_t, int r) { return sample_order_stats(r, n, rng); }
  typename Kernel::Noise plain(int, long long, double delta) {
    return kernel.sample_step(delta, rng);
  }
  void fine(int, long long, double delta, std::vector<typename Kernel::Noise>& out) {
    kernel.sample_fine(delta, n, rng, out);
  }
};

// Same draws, but also records offsets and noises so the run can be replayed
// grid-by-grid. Test/diagnostic path.
template <class Kernel>
struct RecordingSource {
  SamplingSource<Kernel> inner;
  GammaTrace<Kernel>* trace;
  int l0;
  int depth;

  long long units(int level) {  // units of one step at absolute level `level`
    long long u = 1;
    for (int i = 0; i < depth + 1 - (level - l0); ++i) u *= inner.n;
    return u;
  }
  std::vector<int> order_stats(size_t node, int r) {
    auto kap = inner.order_stats(node, r);
    trace->lt.kappa[node] = kap;
    return kap;
  }
  typename Kernel::Noise plain(int level, long long t_units, double delta) {
    auto z = inner.plain(level, t_units, delta);
    trace->steps.push_back({t_units, units(level), z});
    return z;
  }
  void fine(int level, long long t_units, double delta,
            std::vector<typename Kernel::Noise>& out) {
    inner.fine(level, t_units, delta, out);
    long long u = units(level);
    for (int k = 0; k < inner.n; ++k)
      trace->steps.push_back({t_units + k * u, u, out[k]});
  }
};

// Noises drawn as usual, refinement offsets fixed by the caller. Used to sum
// a term over every kappa assignment (noise-free kernels) instead of
// averaging over random ones.
template <class Kernel>
struct PresetKappaSource {
  SamplingSource<Kernel> inner;
  const std::vector<std::vector<int>>* kappa;  // one vector per node, canonical order

  std::vector<int> order_stats(size_t node, int) { return (*kappa)[node]; }
  typename Kernel::Noise plain(int level, long long t_units, double delta) {
    return inner.plain(level, t_units, delta);
  }
  void fine(int level, long long t_units, double delta,
            std::vector<typename Kernel::Noise>& out) {
    inner.fine(level, t_units, delta, out);
  }
};

template <class Kernel, class Source>
class GammaRecursion {
 public:
  GammaRecursion(const Kernel& k, const Tree& tree, int n, int l0, int depth, double T,
                 Source& src, WeightedStateSet& ws)
      : k_(k), tree_(tree), n_(n), l0_(l0), depth_(depth), T_(T), src_(src), ws_(ws),
        tmp_(ws.dim) {}

  void run(size_t node, int level, long long t_units) {
    int r = tree_.child_count_at(node);
    if (r == 0) {
      branch_leaf(level, t_units);
      return;
    }
    // Internal node: its interval is n sub-steps of h_{level+1}; kappa picks
    // which sub-steps the sons refine, the rest advance every live particle
    // with a single shared noise each.
    std::vector<int> kap = src_.order_stats(node, r);
    std::vector<size_t> children = tree_.children_at(node);
    double h_sub = level_step(T_, n_, level + 1);
    long long u_sub = step_units(level + 1);
    long long cur = t_units;
    int done = 0;
    for (int j = 0; j < r; ++j) {
      for (; done < kap[j]; ++done) {
        plain_step(level + 1, cur, h_sub);
        cur += u_sub;
      }
      run(children[j], level + 1, cur);
      cur += u_sub;
      ++done;
    }
    for (; done < n_; ++done) {
      plain_step(level + 1, cur, h_sub);
      cur += u_sub;
    }
  }

 private:
  long long step_units(int level) const {
    long long u = 1;
    for (int i = 0; i < depth_ + 1 - (level - l0_); ++i) u *= n_;
    return u;
  }

  void plain_step(int level, long long t_units, double h) {
    typename Kernel::Noise z = src_.plain(level, t_units, h);
    for (size_t row = 0; row < ws_.count(); ++row) {
      k_.apply(h, z, ws_.state(row), tmp_);
      std::copy(tmp_.begin(), tmp_.end(), ws_.state(row).begin());
    }
  }

  // Leaf interval [t, t + h_level]: every particle splits into its fine
  // continuation (n sub-steps, sign kept) and its coarse continuation (one
  // step driven by the aggregated noise, sign flipped). Fine copies stay in
  // the front half so the k-th leaf's arm choice is bit k of the row index.
  void branch_leaf(int level, long long t_units) {
    double h_coarse = level_step(T_, n_, level);
    double h_fine = level_step(T_, n_, level + 1);
    src_.fine(level + 1, t_units, h_coarse, fines_);
    typename Kernel::Noise coarse = Kernel::aggregate(fines_);

    size_t old = ws_.count();
    size_t dim = static_cast<size_t>(ws_.dim);
    ws_.states.resize(2 * old * dim);
    ws_.signs.resize(2 * old);
    std::copy(ws_.states.begin(), ws_.states.begin() + old * dim,
              ws_.states.begin() + old * dim);
    for (size_t row = 0; row < old; ++row) ws_.signs[old + row] = -ws_.signs[row];

    for (size_t row = 0; row < old; ++row) {
      auto x = ws_.state(row);
      for (int k = 0; k < n_; ++k) {
        k_.apply(h_fine, fines_[k], x, tmp_);
        std::copy(tmp_.begin(), tmp_.end(), x.begin());
      }
    }
    for (size_t row = old; row < 2 * old; ++row) {
      auto x = ws_.state(row);
      k_.apply(h_coarse, coarse, x, tmp_);
      std::copy(tmp_.begin(), tmp_.end(), x.begin());
    }
  }

  const Kernel& k_;
  const Tree& tree_;
  int n_, l0_, depth_;
  double T_;
  Source& src_;
  WeightedStateSet& ws_;
  std::vector<double> tmp_;
  std::vector<typename Kernel::Noise> fines_;
};

template <class Kernel>
void check_gamma_args(const Kernel& kernel, const Tree& tree, int n,
                      std::span<const double> x0) {
  if (n < 2) throw std::invalid_argument("gamma_sample: n must be >= 2");
  if (n < tree.max_branching())
    throw std::invalid_argument("gamma_sample: n smaller than tree branching");
  if (static_cast<int>(x0.size()) != kernel.dim())
    throw std::invalid_argument("gamma_sample: x0 dimension mismatch");
  if (tree.leaves().size() > 62)
    throw std::invalid_argument("gamma_sample: too many leaves");
}

}  // namespace detail

// Evaluates one correction term by the shared-noise branching recursion.
// Returns the signed end states in leaf-bit order: row index bit k set means
// the k-th leaf (canonical order) took its coarse arm; sign is the parity.
template <class Kernel>
WeightedStateSet gamma_sample(const Kernel& kernel, const Tree& tree, int n, int level, double T,
                              std::span<const double> x0, RngStream& rng) {
  detail::check_gamma_args(kernel, tree, n, x0);
  WeightedStateSet ws;
  ws.dim = kernel.dim();
  ws.states.assign(x0.begin(), x0.end());
  ws.signs.assign(1, 1);
  detail::SamplingSource<Kernel> src{kernel, rng, n};
  detail::GammaRecursion<Kernel, detail::SamplingSource<Kernel>> rec(
      kernel, tree, n, level, tree.depth(), T, src, ws);
  rec.run(0, level, 0);
  return ws;
}

// Branching evaluation with the refinement offsets pinned to `kappa` instead
// of drawn. kappa[i] must hold child_count_at(i) strictly increasing values in
// [0, n) for every internal node i (leaf entries are ignored).
template <class Kernel>
WeightedStateSet gamma_sample_with_kappa(const Kernel& kernel, const Tree& tree, int n, int level,
                                         double T, std::span<const double> x0,
                                         const std::vector<std::vector<int>>& kappa,
                                         RngStream& rng) {
  detail::check_gamma_args(kernel, tree, n, x0);
  if (kappa.size() != tree.size())
    throw std::invalid_argument("gamma_sample_with_kappa: kappa size mismatch");
  for (size_t i = 0; i < tree.size(); ++i) {
    int r = tree.child_count_at(i);
    if (r == 0) continue;
    if (static_cast<int>(kappa[i].size()) != r)
      throw std::invalid_argument("gamma_sample_with_kappa: kappa arity mismatch");
    for (int j = 0; j < r; ++j)
      if (kappa[i][j] < 0 || kappa[i][j] >= n || (j > 0 && kappa[i][j] <= kappa[i][j - 1]))
        throw std::invalid_argument("gamma_sample_with_kappa: kappa values invalid");
  }
  WeightedStateSet ws;
  ws.dim = kernel.dim();
  ws.states.assign(x0.begin(), x0.end());
  ws.signs.assign(1, 1);
  detail::PresetKappaSource<Kernel> src{{kernel, rng, n}, &kappa};
  detail::GammaRecursion<Kernel, detail::PresetKappaSource<Kernel>> rec(
      kernel, tree, n, level, tree.depth(), T, src, ws);
  rec.run(0, level, 0);
  return ws;
}

// Same run, but keeps the sampled offsets and every elementary noise so the
// result can be replayed one grid at a time.
template <class Kernel>
GammaTrace<Kernel> gamma_sample_traced(const Kernel& kernel, const Tree& tree, int n, int level,
                                       double T, std::span<const double> x0, RngStream& rng) {
  detail::check_gamma_args(kernel, tree, n, x0);
  GammaTrace<Kernel> trace;
  trace.lt.tree = tree;
  trace.lt.n = n;
  trace.lt.kappa.resize(tree.size());
  trace.result.dim = kernel.dim();
  trace.result.states.assign(x0.begin(), x0.end());
  trace.result.signs.assign(1, 1);
  detail::SamplingSource<Kernel> inner{kernel, rng, n};
  detail::RecordingSource<Kernel> src{inner, &trace, level, tree.depth()};
  detail::GammaRecursion<Kernel, detail::RecordingSource<Kernel>> rec(
      kernel, tree, n, level, tree.depth(), T, src, trace.result);
  rec.run(0, level, 0);
  return trace;
}

// Replays a traced run one coarse/fine leaf assignment at a time: builds the
// pruned grid of every assignment and drives it with the recorded noises
// (coarse steps get the aggregate of the fine noises they span). Row order
// and signs match gamma_sample's convention, so the two evaluations can be
// compared entry by entry. This is the independent-oracle path: it exercises
// grids and bookkeeping a second way, sharing only the kernel step map.
template <class Kernel>
WeightedStateSet gamma_oracle(const Kernel& kernel, const GammaTrace<Kernel>& trace, int level,
                              double T, std::span<const double> x0) {
  const LabeledTree& lt = trace.lt;
  Grid full = grid(lt, level);

  std::vector<RecordedStep<Kernel>> steps(trace.steps.begin(), trace.steps.end());
  std::sort(steps.begin(), steps.end(),
            [](const auto& a, const auto& b) { return a.t_units < b.t_units; });
  if (steps.size() != full.step_count())
    throw std::logic_error("gamma_oracle: trace does not tile the term grid");
  std::vector<typename Kernel::Noise> noises;
  noises.reserve(steps.size());
  for (size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].t_units != full.times[k] ||
        steps[k].dur_units != full.times[k + 1] - full.times[k])
      throw std::logic_error("gamma_oracle: trace does not tile the term grid");
    noises.push_back(steps[k].noise);
  }

  std::vector<NeveuWord> leaves = lt.tree.leaves();
  size_t r = leaves.size();
  WeightedStateSet ws;
  ws.dim = kernel.dim();
  ws.states.resize((size_t{1} << r) * ws.dim);
  ws.signs.resize(size_t{1} << r);
  std::vector<NeveuWord> coarse;
  for (uint64_t mask = 0; mask < (uint64_t{1} << r); ++mask) {
    coarse.clear();
    for (size_t k = 0; k < r; ++k)
      if (mask & (uint64_t{1} << k)) coarse.push_back(leaves[k]);
    Grid g = pruned_grid(lt, coarse, level);
    run_on_grid(kernel, g, full, noises, T, x0, ws.state(mask));
    ws.signs[mask] = (std::popcount(mask) % 2 == 0) ? 1 : -1;
  }
  return ws;
}

}  // namespace rgrids
