#pragma once

#include <string>
#include <vector>

#include "randomgrids/rational.hpp"
#include "randomgrids/tree.hpp"

namespace rgrids {

// One correction term of the expansion: a subtree shape A of the scheme tree,
// plus the tree statistics the estimator needs. The combinatorial weight of
// the term is prod over nodes u of C(n, j_u(A)) and can exceed any fixed-width
// integer, so it is kept as a branching profile here and expanded on demand.
struct ForestTerm {
  Tree tree;
  std::vector<int> branching;  // j_u(A) per node, canonical node order
  int leaf_depth_sum = 0;      // sum over leaves of |u|
};

// All correction shapes attached to tree T:
//   F({∅}) = {{∅}},
//   F(T)   = {{∅}} ∪ ⋃_{i=1..j_∅(T)} { root(A_1,..,A_i) : A_k ∈ F(T'_i) },
// where the i-th union grafts i independent members of the i-th subtree's
// forest under a common root. Result is sorted canonically and duplicate-free.
std::vector<ForestTerm> forest_of(const Tree& t);

// prod_u C(n, j_u(A)) as a decimal string (exact, arbitrary size).
std::string coefficient_string(const ForestTerm& term, int n);
// Same product rounded to double; fine for weighting samples.
double coefficient_double(const ForestTerm& term, int n);

// Splits terms into (kept, dropped) under the variance-based rule: drop A when
// (a - 1) * leaf_depth_sum(A) >= nu. a = 1 keeps everything, a = 3/2 suits
// additive-noise models, a = 2 noise-free ones.
struct PruneResult {
  std::vector<ForestTerm> kept;
  std::vector<ForestTerm> dropped;
};
PruneResult prune_forest(std::vector<ForestTerm> terms, int nu, const Rational& a);

// Work of evaluating one term by full enumeration: total elementary kernel
// steps summed over all 2^r coarse/fine leaf assignments of A (r = #leaves).
// Closed form 2^r [n + (|A|-1)(n-1)] - r 2^{r-1} (n-1); the branching
// evaluator shares work between assignments and costs less, so this is the
// conservative per-sample figure.
long long flat_cost(const Tree& tree, int n);
// Leading coefficient of flat_cost in n: 2^r |A| - r 2^{r-1}.
long long flat_cost_units(const Tree& tree);

// JSON rendering of a forest: array of {tree, coefficient_formula,
// leaf_depth_sum, flat_cost_units} (+ coefficient and flat_cost when n > 0).
std::string forest_json(const std::vector<ForestTerm>& terms, int n);

}  // namespace rgrids
