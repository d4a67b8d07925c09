#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "randomgrids/rng.hpp"
#include "randomgrids/tree.hpp"

namespace rgrids {

// Sorted r-subset of {0, ..., n-1}, drawn uniformly among all such subsets.
// Built by the insertion construction: given the sorted first r-1 values,
// draw xi uniform on {0,..,n-r} and shift it past each earlier value it meets,
//   kappa_r = xi + sum_i 1{ xi + (i-1) >= kappa_i },
// which maps xi uniformly onto the complement. The uniform inputs come
// through a callback so tests can enumerate the sampler's whole input space.
std::vector<int> sample_order_stats_with(int r, int n,
                                         const std::function<uint64_t(uint64_t)>& uniform_below);
std::vector<int> sample_order_stats(int r, int n, RngStream& rng);

// A tree shape plus the sampled refinement offsets: kappa[v] is the sorted
// set of sub-step indices (one per son of v, in son order) telling which of
// the n sub-steps of v's interval each son refines. Empty for leaves.
struct LabeledTree {
  Tree tree;
  int n = 0;
  std::vector<std::vector<int>> kappa;  // indexed like tree.nodes()

  const std::vector<int>& kappa_at(size_t node_index) const { return kappa[node_index]; }
};

// Draws kappa(v) for every internal node, in canonical node order.
// Requires n >= max branching (cannot place j sons into fewer than j slots).
LabeledTree label_tree(const Tree& tree, int n, RngStream& rng);

// Time grid on [0, h_level] where h_l = T / n^l. All grid points are integer
// multiples of the finest step h_{level + depth + 1}, so times are stored as
// exact integers in that unit: unit_count = n^{rel_exp} units span the whole
// interval, rel_exp = depth + 1. step_levels[k] is the p with
// times[k+1] - times[k] = h_{level + p}.
struct Grid {
  int level = 0;
  int n = 0;
  int rel_exp = 1;
  std::vector<long long> times;    // ascending, times.front()=0, times.back()=n^rel_exp
  std::vector<int> step_levels;    // size times.size()-1, values in [1, rel_exp]

  size_t step_count() const { return step_levels.size(); }
  long long total_units() const { return times.back(); }
  bool contains_time(long long t) const;
  // True if every point of this grid is a point of g (same level and units).
  bool refines(const Grid& g) const;
};

// Start of node u's interval, as units of h_{level + |tree depth| + 1}:
// birth(u) = sum_k kappa_{u_k}(u_1..u_{k-1}) * h_{level+k}.
long long birth_units(const LabeledTree& lt, const NeveuWord& u);

// Number of units in one step of level `level + p` (p relative), i.e.
// n^(rel_exp - p).
long long units_per_step(const LabeledTree& lt, int p);

// The full refinement grid of the labeled tree: every node contributes the
// n+1 endpoints of its refined sub-steps. Union construction (flat, via birth
// times).
Grid grid(const LabeledTree& lt, int level);

// Same set built by the level recursion (uniform n-grid of the root interval,
// plus each son's grid shifted to its slot). Kept as an independent
// construction to cross-check grid() against.
Grid grid_recursive(const LabeledTree& lt, int level);

// Grid of the assignment that coarsens the leaves in `coarse_leaves` (they
// keep their one-step interval, losing their n sub-steps) while every other
// node stays refined. coarse_leaves must be leaves of the tree. When every
// node is coarsened away (single-node tree, its leaf coarse) the grid is the
// two-point {0, h_level}.
Grid pruned_grid(const LabeledTree& lt, const std::vector<NeveuWord>& coarse_leaves, int level);

// Recursive counterpart of pruned_grid, for cross-checking.
Grid pruned_grid_recursive(const LabeledTree& lt, const std::vector<NeveuWord>& coarse_leaves,
                           int level);

// Human-readable dump: each point as "q/n^e" of the interval [0, h_level].
std::string grid_to_string(const Grid& g);

// h_l = T / n^l, the one helper every consumer uses so equal levels give
// bit-equal step sizes everywhere.
inline double level_step(double T, int n, int level) {
  double p = 1.0;
  for (int i = 0; i < level; ++i) p *= n;
  return T / p;
}

}  // namespace rgrids
