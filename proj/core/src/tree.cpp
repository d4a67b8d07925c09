#include "randomgrids/tree.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace rgrids {

Tree::Tree() {
  nodes_.emplace_back();
  child_counts_.push_back(0);
}

Tree Tree::from_nodes(std::vector<NeveuWord> nodes) {
  Tree t;
  t.nodes_ = std::move(nodes);
  std::sort(t.nodes_.begin(), t.nodes_.end());
  t.nodes_.erase(std::unique(t.nodes_.begin(), t.nodes_.end()), t.nodes_.end());
  t.index();
  return t;
}

Tree Tree::with_children(const std::vector<Tree>& children) {
  Tree t;
  t.nodes_.clear();
  t.nodes_.emplace_back();
  for (size_t i = 0; i < children.size(); ++i) {
    for (const NeveuWord& u : children[i].nodes_)
      t.nodes_.push_back(u.prefixed(static_cast<int>(i + 1)));
  }
  // Subtree blocks arrive ordered by first digit and each block is already
  // sorted, so the concatenation is sorted as long as the root leads.
  t.index();
  return t;
}

void Tree::index() {
  if (nodes_.empty() || !nodes_[0].is_root())
    throw std::invalid_argument("Tree: missing root");
  if (!std::is_sorted(nodes_.begin(), nodes_.end()))
    throw std::logic_error("Tree: nodes not in canonical order");

  child_counts_.assign(nodes_.size(), 0);
  for (size_t i = 1; i < nodes_.size(); ++i) {
    const NeveuWord& u = nodes_[i];
    NeveuWord p = u.parent();
    auto pi = index_of(p);
    if (!pi) throw std::invalid_argument("Tree: node " + u.to_string() + " has no parent");
    int last = u.digits.back();
    if (last > 1 && !contains(p.child(last - 1)))
      throw std::invalid_argument("Tree: node " + u.to_string() + " missing left sibling");
    child_counts_[*pi] = std::max(child_counts_[*pi], last);
  }
}

bool Tree::contains(const NeveuWord& u) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), u);
}

std::optional<size_t> Tree::index_of(const NeveuWord& u) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), u);
  if (it == nodes_.end() || !(*it == u)) return std::nullopt;
  return static_cast<size_t>(it - nodes_.begin());
}

int Tree::child_count(const NeveuWord& u) const {
  auto i = index_of(u);
  if (!i) throw std::invalid_argument("Tree: no node " + u.to_string());
  return child_counts_[*i];
}

std::vector<size_t> Tree::children_at(size_t node_index) const {
  std::vector<size_t> out;
  const NeveuWord& u = nodes_[node_index];
  for (int i = 1; i <= child_counts_[node_index]; ++i) {
    auto ci = index_of(u.child(i));
    out.push_back(*ci);
  }
  return out;
}

Tree Tree::subtree(int i) const {
  std::vector<NeveuWord> sub;
  NeveuWord prefix;
  prefix.digits.push_back(i);
  for (const NeveuWord& u : nodes_)
    if (u.has_prefix(prefix)) sub.push_back(u.tail());
  if (sub.empty()) throw std::invalid_argument("Tree: no subtree " + std::to_string(i));
  return from_nodes(std::move(sub));
}

std::vector<NeveuWord> Tree::leaves() const {
  std::vector<NeveuWord> out;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (child_counts_[i] == 0) out.push_back(nodes_[i]);
  return out;
}

std::vector<size_t> Tree::leaf_indices() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (child_counts_[i] == 0) out.push_back(i);
  return out;
}

int Tree::depth() const {
  int d = 0;
  for (const NeveuWord& u : nodes_) d = std::max(d, u.length());
  return d;
}

int Tree::leaf_depth_sum() const {
  int s = 0;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (child_counts_[i] == 0) s += nodes_[i].length();
  return s;
}

int Tree::max_branching() const {
  int m = 0;
  for (int c : child_counts_) m = std::max(m, c);
  return m;
}

std::string Tree::to_string() const {
  std::string out = "{";
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (i) out += ',';
    out += nodes_[i].to_string();
  }
  out += '}';
  return out;
}

Tree Tree::parse(const std::string& s) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}')
    throw std::invalid_argument("Tree: expected {...}, got '" + s + "'");
  std::vector<NeveuWord> nodes;
  size_t pos = 1;
  while (pos < s.size() - 1) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos || comma > s.size() - 1) comma = s.size() - 1;
    nodes.push_back(NeveuWord::parse(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return from_nodes(std::move(nodes));
}

}  // namespace rgrids
