#include "randomgrids/grids.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rgrids {

std::vector<int> sample_order_stats_with(int r, int n,
                                         const std::function<uint64_t(uint64_t)>& uniform_below) {
  if (r < 1 || r > n)
    throw std::invalid_argument("sample_order_stats: need 1 <= r <= n");
  std::vector<int> vals;
  vals.reserve(r);
  for (int t = 1; t <= r; ++t) {
    int xi = static_cast<int>(uniform_below(static_cast<uint64_t>(n - t + 1)));
    // Shift xi past each earlier (sorted) value it would collide with; the
    // comparison uses the raw xi with the running offset folded into the
    // index, so the image is exactly the complement of the chosen values.
    int cnt = 0;
    for (size_t i = 0; i < vals.size(); ++i)
      if (xi + static_cast<int>(i) >= vals[i]) ++cnt;
    int v = xi + cnt;
    vals.insert(std::lower_bound(vals.begin(), vals.end(), v), v);
  }
  return vals;
}

std::vector<int> sample_order_stats(int r, int n, RngStream& rng) {
  return sample_order_stats_with(r, n, [&rng](uint64_t b) { return rng.uniform_below(b); });
}

LabeledTree label_tree(const Tree& tree, int n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("label_tree: n must be >= 2");
  if (n < tree.max_branching())
    throw std::invalid_argument("label_tree: n smaller than tree branching " +
                                std::to_string(tree.max_branching()));
  LabeledTree lt;
  lt.tree = tree;
  lt.n = n;
  lt.kappa.resize(tree.size());
  for (size_t i = 0; i < tree.size(); ++i) {
    int r = tree.child_count_at(i);
    if (r > 0) lt.kappa[i] = sample_order_stats(r, n, rng);
  }
  return lt;
}

namespace {

long long pow_ll(long long base, int e) {
  long long p = 1;
  for (int i = 0; i < e; ++i) {
    if (p > (1LL << 62) / base) throw std::overflow_error("grid: n^depth overflows 64-bit units");
    p *= base;
  }
  return p;
}

void finish_grid(Grid& g) {
  std::sort(g.times.begin(), g.times.end());
  g.times.erase(std::unique(g.times.begin(), g.times.end()), g.times.end());
  g.step_levels.clear();
  g.step_levels.reserve(g.times.size() - 1);
  for (size_t k = 0; k + 1 < g.times.size(); ++k) {
    long long diff = g.times[k + 1] - g.times[k];
    // Every step must span exactly n^(rel_exp - p) units for some level p;
    // anything else means the construction produced a malformed grid.
    long long u = pow_ll(g.n, g.rel_exp);
    int p = 0;
    while (u > diff && p <= g.rel_exp) {
      u /= g.n;
      ++p;
    }
    if (u != diff)
      throw std::logic_error("grid: step is not a power-of-n fraction of the interval");
    g.step_levels.push_back(p);
  }
}

}  // namespace

bool Grid::contains_time(long long t) const {
  return std::binary_search(times.begin(), times.end(), t);
}

bool Grid::refines(const Grid& g) const {
  if (level != g.level || n != g.n || rel_exp != g.rel_exp) return false;
  return std::all_of(g.times.begin(), g.times.end(),
                     [this](long long t) { return contains_time(t); });
}

long long units_per_step(const LabeledTree& lt, int p) {
  return pow_ll(lt.n, lt.tree.depth() + 1 - p);
}

long long birth_units(const LabeledTree& lt, const NeveuWord& u) {
  long long t = 0;
  NeveuWord prefix;
  for (int k = 0; k < u.length(); ++k) {
    auto pi = lt.tree.index_of(prefix);
    if (!pi) throw std::invalid_argument("birth_units: word not in tree");
    int son = u.digits[k];
    const std::vector<int>& kap = lt.kappa[*pi];
    if (son < 1 || son > static_cast<int>(kap.size()))
      throw std::invalid_argument("birth_units: word not in tree");
    t += kap[son - 1] * units_per_step(lt, k + 1);
    prefix = prefix.child(son);
  }
  return t;
}

namespace {

// Shared union-form builder: each listed node contributes the n+1 endpoints
// of its refined sub-steps; `coarse` nodes contribute only their own interval
// endpoints.
Grid build_union(const LabeledTree& lt, int level, const std::vector<NeveuWord>& refined) {
  Grid g;
  g.level = level;
  g.n = lt.n;
  g.rel_exp = lt.tree.depth() + 1;
  g.times.push_back(0);
  g.times.push_back(pow_ll(lt.n, g.rel_exp));  // endpoints always present
  for (const NeveuWord& u : refined) {
    long long t0 = birth_units(lt, u);
    long long sub = units_per_step(lt, u.length() + 1);
    for (int k = 0; k <= lt.n; ++k) g.times.push_back(t0 + k * sub);
  }
  finish_grid(g);
  return g;
}

std::vector<NeveuWord> check_coarse_leaves(const LabeledTree& lt,
                                           const std::vector<NeveuWord>& coarse_leaves) {
  auto leaves = lt.tree.leaves();
  for (const NeveuWord& u : coarse_leaves)
    if (!std::binary_search(leaves.begin(), leaves.end(), u))
      throw std::invalid_argument("pruned_grid: " + u.to_string() + " is not a leaf");
  std::vector<NeveuWord> sorted = coarse_leaves;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("pruned_grid: duplicate leaf");
  return sorted;
}

}  // namespace

Grid grid(const LabeledTree& lt, int level) {
  return build_union(lt, level, lt.tree.nodes());
}

Grid pruned_grid(const LabeledTree& lt, const std::vector<NeveuWord>& coarse_leaves, int level) {
  std::vector<NeveuWord> coarse = check_coarse_leaves(lt, coarse_leaves);
  std::vector<NeveuWord> refined;
  for (const NeveuWord& u : lt.tree.nodes())
    if (!std::binary_search(coarse.begin(), coarse.end(), u)) refined.push_back(u);
  return build_union(lt, level, refined);
}

namespace {

void rec_points(const LabeledTree& lt, size_t node_idx, int depth, long long t0,
                const std::vector<NeveuWord>& coarse, Grid& g) {
  const NeveuWord& u = lt.tree.node(node_idx);
  if (std::binary_search(coarse.begin(), coarse.end(), u)) {
    // Coarsened leaf: keeps its single step, no sub-grid.
    g.times.push_back(t0);
    g.times.push_back(t0 + pow_ll(lt.n, g.rel_exp - depth));
    return;
  }
  long long sub = units_per_step(lt, depth + 1);
  for (int k = 0; k <= lt.n; ++k) g.times.push_back(t0 + k * sub);
  const std::vector<int>& kap = lt.kappa[node_idx];
  auto children = lt.tree.children_at(node_idx);
  for (size_t i = 0; i < children.size(); ++i)
    rec_points(lt, children[i], depth + 1, t0 + kap[i] * sub, coarse, g);
}

}  // namespace

Grid grid_recursive(const LabeledTree& lt, int level) {
  return pruned_grid_recursive(lt, {}, level);
}

Grid pruned_grid_recursive(const LabeledTree& lt, const std::vector<NeveuWord>& coarse_leaves,
                           int level) {
  std::vector<NeveuWord> coarse = check_coarse_leaves(lt, coarse_leaves);
  Grid g;
  g.level = level;
  g.n = lt.n;
  g.rel_exp = lt.tree.depth() + 1;
  g.times.push_back(0);
  g.times.push_back(pow_ll(lt.n, g.rel_exp));
  rec_points(lt, 0, 0, 0, coarse, g);
  finish_grid(g);
  return g;
}

std::string grid_to_string(const Grid& g) {
  std::string out = "{";
  for (size_t i = 0; i < g.times.size(); ++i) {
    if (i) out += ", ";
    long long q = g.times[i];
    int e = g.rel_exp;
    while (q != 0 && q % g.n == 0 && e > 0) {
      q /= g.n;
      --e;
    }
    if (q == 0) {
      out += "0";
    } else if (e == 0) {
      out += std::to_string(q);
    } else {
      long long den = 1;
      for (int k = 0; k < e; ++k) den *= g.n;
      out += std::to_string(q) + "/" + std::to_string(den);
    }
  }
  out += "}";
  return out;
}

}  // namespace rgrids
