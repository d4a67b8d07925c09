#include "randomgrids/scheme.hpp"

#include <map>
#include <stdexcept>

namespace rgrids {

namespace {
constexpr int kMaxRecursionLevel = 256;  // termination backstop, never hit for alpha > 0

void check_params(int nu, int level, const Rational& alpha) {
  if (nu < 1) throw std::invalid_argument("scheme_tree: order must be >= 1");
  if (level < 0) throw std::invalid_argument("scheme_tree: level must be >= 0");
  if (!(alpha > Rational(0))) throw std::invalid_argument("scheme_tree: alpha must be > 0");
}
}  // namespace

int branching_budget(int level, int nu, const Rational& alpha) {
  check_params(nu, level, alpha);
  // (1+alpha)*l + alpha
  Rational denom = (Rational(1) + alpha) * Rational(level) + alpha;
  return static_cast<int>(ceil_rational(Rational(nu) / denom));
}

int child_order(int i, int level, int nu, const Rational& alpha) {
  check_params(nu, level, alpha);
  if (i < 1) throw std::invalid_argument("child_order: i is 1-based");
  // i - (1+alpha)(l+1)(i-1)
  Rational inner = Rational(i) - (Rational(1) + alpha) * Rational(level + 1) * Rational(i - 1);
  return nu + static_cast<int>(ceil_rational(inner));
}

Tree scheme_tree(int nu, int level, const Rational& alpha) {
  check_params(nu, level, alpha);
  if (level > kMaxRecursionLevel)
    throw std::logic_error("scheme_tree: recursion failed to terminate");
  int m = branching_budget(level, nu, alpha);
  if (m <= 1) return Tree();  // leaf
  std::vector<Tree> children;
  children.reserve(m - 1);
  for (int i = 1; i <= m - 1; ++i) {
    int q = child_order(i, level, nu, alpha);
    if (q < 1)
      throw std::logic_error("scheme_tree: child order dropped below 1");
    children.push_back(scheme_tree(q, level + 1, alpha));
  }
  return Tree::with_children(children);
}

int smoothness_requirement(int nu, const SchemeOrderParams& params) {
  if (params.beta < 0) throw std::invalid_argument("smoothness_requirement: beta must be >= 0");
  std::map<std::pair<int, int>, int> memo;  // (level, nu) -> k
  auto rec = [&](auto&& self, int level, int order) -> int {
    if (level > kMaxRecursionLevel)
      throw std::logic_error("smoothness_requirement: recursion failed to terminate");
    auto key = std::make_pair(level, order);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int m = branching_budget(level, order, params.alpha);
    int k = params.beta * m;
    for (int i = 1; i <= m - 1; ++i)
      k = std::max(k, i * self(self, level + 1, child_order(i, level, order, params.alpha)));
    memo[key] = k;
    return k;
  };
  return rec(rec, 0, nu);
}

}  // namespace rgrids
