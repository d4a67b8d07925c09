// Shared helpers for the unit tests: tiny exact binomials, exhaustive kappa
// enumeration (independent of the library's own combination walker), and a
// couple of throwaway models with known structure.
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "randomgrids/grids.hpp"
#include "randomgrids/kernels.hpp"
#include "randomgrids/tree.hpp"

namespace testsupport {

inline long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// All sorted k-subsets of {0,..,n-1}, by plain recursion.
inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int v = start; v < n; ++v) {
      cur.push_back(v);
      rec(v + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

// Every kappa assignment of `tree` at refinement n: the cartesian product of
// the per-internal-node son-slot subsets.
inline std::vector<std::vector<std::vector<int>>> all_kappas(const rgrids::Tree& tree, int n) {
  std::vector<size_t> internal;
  std::vector<std::vector<std::vector<int>>> choices;
  for (size_t i = 0; i < tree.size(); ++i)
    if (tree.child_count_at(i) > 0) {
      internal.push_back(i);
      choices.push_back(subsets(n, tree.child_count_at(i)));
    }
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> cur(tree.size());
  std::function<void(size_t)> rec = [&](size_t pos) {
    if (pos == internal.size()) {
      out.push_back(cur);
      return;
    }
    for (const auto& pick : choices[pos]) {
      cur[internal[pos]] = pick;
      rec(pos + 1);
      cur[internal[pos]].clear();
    }
    cur[internal[pos]].clear();
  };
  rec(0);
  return out;
}

// dX = k (theta - X) dt: affine with fixed point theta, so every pruned-grid
// scheme composition depends only on the multiset of step sizes.
inline rgrids::ModelSpec linear_ode(double k, double theta, double x0) {
  rgrids::ModelSpec m;
  m.id = "test-linear-ode";
  m.dim = 1;
  m.horizon = 1.0;
  m.x0 = {x0};
  m.payoff = [](std::span<const double> x) { return x[0]; };
  m.drift = [k, theta](std::span<const double> x, std::span<double> out) {
    out[0] = k * (theta - x[0]);
  };
  return m;
}

// A 2-d diffusion with two driving Brownian motions and no special structure,
// to exercise the dim > 1 paths.
inline rgrids::ModelSpec twodim_sde() {
  rgrids::ModelSpec m;
  m.id = "test-2d";
  m.dim = 2;
  m.horizon = 1.0;
  m.x0 = {1.0, 0.5};
  m.payoff = [](std::span<const double> x) { return x[0] * x[0] + std::sin(x[1]); };
  m.drift = [](std::span<const double> x, std::span<double> out) {
    out[0] = -0.5 * x[1];
    out[1] = 0.25 * x[0] - 0.1 * x[1];
  };
  m.diffusion = {
      [](std::span<const double> x, std::span<double> out) {
        out[0] = 0.2 * x[0];
        out[1] = 0.05;
      },
      [](std::span<const double> x, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 0.1 + 0.05 * std::cos(x[0]);
      },
  };
  return m;
}

inline double chi_square(const std::vector<long long>& counts, double expected) {
  double c = 0;
  for (long long k : counts) {
    double d = static_cast<double>(k) - expected;
    c += d * d / expected;
  }
  return c;
}

}  // namespace testsupport
