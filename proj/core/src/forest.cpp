#include "randomgrids/forest.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rgrids {

namespace {

// Plain recursive enumeration with memoization on the subtree shape. Subtree
// shapes repeat a lot inside one scheme tree (long chains especially), and
// across the tensor products below, so the memo keeps the order-10 forest
// (tens of thousands of trees) well under a second.
std::vector<Tree> forests_rec(const Tree& t, std::map<std::string, std::vector<Tree>>& memo) {
  std::string key = t.to_string();
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  std::vector<Tree> out;
  out.emplace_back();  // the bare root, present for every T
  int sons = t.child_count_at(0);
  for (int i = 1; i <= sons; ++i) {
    const std::vector<Tree> fi = forests_rec(t.subtree(i), memo);
    // Ordered i-tuples over fi, odometer enumeration. Every generated tree
    // has exactly i root sons, so tuples never collide across i and the
    // concatenation stays duplicate-free.
    std::vector<size_t> idx(i, 0);
    std::vector<Tree> parts(i, Tree());
    while (true) {
      for (int k = 0; k < i; ++k) parts[k] = fi[idx[k]];
      out.push_back(Tree::with_children(parts));
      int pos = i - 1;
      while (pos >= 0 && ++idx[pos] == fi.size()) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  std::sort(out.begin(), out.end());
  memo[key] = out;
  return out;
}

mpz_class coefficient_mpz(const ForestTerm& term, int n) {
  if (n < 1) throw std::invalid_argument("coefficient: n must be >= 1");
  mpz_class c = 1;
  for (int j : term.branching) {
    if (j == 0) continue;  // C(n,0) = 1
    if (j > n) throw std::invalid_argument("coefficient: tree branching exceeds n");
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(j));
    c *= b;
  }
  return c;
}

}  // namespace

std::vector<ForestTerm> forest_of(const Tree& t) {
  std::map<std::string, std::vector<Tree>> memo;
  std::vector<Tree> trees = forests_rec(t, memo);
  std::vector<ForestTerm> out;
  out.reserve(trees.size());
  for (Tree& a : trees) {
    ForestTerm ft;
    ft.leaf_depth_sum = a.leaf_depth_sum();
    ft.branching.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) ft.branching.push_back(a.child_count_at(i));
    ft.tree = std::move(a);
    out.push_back(std::move(ft));
  }
  return out;
}

std::string coefficient_string(const ForestTerm& term, int n) {
  return coefficient_mpz(term, n).get_str();
}

double coefficient_double(const ForestTerm& term, int n) {
  return coefficient_mpz(term, n).get_d();
}

PruneResult prune_forest(std::vector<ForestTerm> terms, int nu, const Rational& a) {
  if (!(a >= Rational(1))) throw std::invalid_argument("prune_forest: a must be >= 1");
  PruneResult res;
  for (ForestTerm& t : terms) {
    // (a-1) * S >= nu, exactly: (a.num - a.den) * S >= nu * a.den
    bool drop = (a.num - a.den) * t.leaf_depth_sum >= static_cast<long long>(nu) * a.den;
    (drop ? res.dropped : res.kept).push_back(std::move(t));
  }
  return res;
}

long long flat_cost(const Tree& tree, int n) {
  long long r = static_cast<long long>(tree.leaves().size());
  long long card = static_cast<long long>(tree.size());
  long long pow2r = 1LL << r;
  return pow2r * (n + (card - 1) * (n - 1)) - r * (pow2r / 2) * (n - 1);
}

long long flat_cost_units(const Tree& tree) {
  long long r = static_cast<long long>(tree.leaves().size());
  long long card = static_cast<long long>(tree.size());
  long long pow2r = 1LL << r;
  return pow2r * card - r * (pow2r / 2);
}

std::string forest_json(const std::vector<ForestTerm>& terms, int n) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ForestTerm& t : terms) {
    nlohmann::ordered_json row;
    row["tree"] = t.tree.to_string();
    row["coefficient_formula"] = t.branching;
    row["leaf_depth_sum"] = t.leaf_depth_sum;
    row["flat_cost_units"] = flat_cost_units(t.tree);
    if (n > 0) {
      row["coefficient"] = coefficient_string(t, n);
      row["flat_cost"] = flat_cost(t.tree, n);
    }
    arr.push_back(std::move(row));
  }
  return arr.dump(2);
}

}  // namespace rgrids
