#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randomgrids/neveu.hpp"

namespace rgrids {

// Finite rooted ordered tree stored as its sorted set of node addresses.
// Invariants enforced at construction:
//   - contains the root,
//   - closed under taking parents,
//   - closed under left siblings (if u.k is a node and k > 1, u.(k-1) is too).
// Node order is lexicographic, which coincides with a preorder walk visiting
// children in ascending index; index 0 is always the root.
class Tree {
 public:
  Tree();  // single root node
  static Tree from_nodes(std::vector<NeveuWord> nodes);
  static Tree parse(const std::string& s);  // inverse of to_string

  // Root plus the given subtrees grafted in order: {∅} ∪ 1·A1 ∪ ... ∪ k·Ak.
  static Tree with_children(const std::vector<Tree>& children);

  size_t size() const { return nodes_.size(); }
  const std::vector<NeveuWord>& nodes() const { return nodes_; }
  const NeveuWord& node(size_t i) const { return nodes_[i]; }

  bool contains(const NeveuWord& u) const;
  std::optional<size_t> index_of(const NeveuWord& u) const;

  // Number of sons of u. Zero for leaves.
  int child_count(const NeveuWord& u) const;
  int child_count_at(size_t node_index) const { return child_counts_[node_index]; }

  // Node indices of the sons of node_index, ascending.
  std::vector<size_t> children_at(size_t node_index) const;

  // The i-th subtree (1-based), re-rooted: {u : i.u in tree}.
  Tree subtree(int i) const;

  std::vector<NeveuWord> leaves() const;
  std::vector<size_t> leaf_indices() const;

  int depth() const;          // max node length
  int leaf_depth_sum() const; // sum of |u| over leaves
  int max_branching() const;  // max child_count over nodes

  // Canonical serialization, e.g. "{∅,1,11,2}". Node order is canonical, so
  // equal trees serialize identically and the string doubles as a map key.
  std::string to_string() const;

  bool operator==(const Tree&) const = default;
  // Lexicographic on the canonical node sequence; the order used for forests.
  bool operator<(const Tree& o) const { return nodes_ < o.nodes_; }

 private:
  std::vector<NeveuWord> nodes_;
  std::vector<int> child_counts_;

  void index();  // fills child_counts_, validates axioms
};

}  // namespace rgrids
