#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "randomgrids/forest.hpp"
#include "randomgrids/gamma.hpp"
#include "randomgrids/kernels.hpp"
#include "randomgrids/scheme.hpp"

namespace rgrids {

// Canonical (alpha, beta) of each one-step kernel: alpha drives the tree
// construction, beta the smoothness requirement.
inline SchemeOrderParams order_params_for(const std::string& kernel_name) {
  if (kernel_name == "euler") return {Rational{1, 1}, 4};
  if (kernel_name == "ninomiya-victoir") return {Rational{2, 1}, 6};
  if (kernel_name == "pdmp") return {Rational{1, 1}, 2};
  throw std::invalid_argument("unknown kernel: " + kernel_name);
}

// Streaming mean/variance (Welford) with pairwise merge (Chan). Chunks are
// always merged in chunk order, so the result is byte-identical no matter
// how many workers produced them.
struct ChunkAcc {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  void merge(const ChunkAcc& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    double na = static_cast<double>(count);
    double nb = static_cast<double>(o.count);
    double d = o.mean - mean;
    mean += d * nb / (na + nb);
    m2 += o.m2 + d * d * na * nb / (na + nb);
    count += o.count;
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double ci_half_width() const {
    return count > 0 ? 1.96 * stddev() / std::sqrt(static_cast<double>(count)) : 0.0;
  }
};

// Samples needed to bring a term's 95% half-width under eps, floored at the
// pilot size. The tiny relative shave before ceil absorbs the last-bit noise
// of the double products so exact-ratio inputs do not round up by one.
inline long long allocate_samples(double variance, double eps, long long pilot) {
  if (eps <= 0) throw std::invalid_argument("allocate_samples: eps must be positive");
  double need = 1.96 * 1.96 * variance / (eps * eps);
  long long n = static_cast<long long>(std::ceil(need * (1.0 - 1e-12)));
  return std::max(pilot, n);
}

struct EstimateOptions {
  int nu = 2;
  int n = 2;
  Rational alpha{1, 1};   // tree-construction order exponent
  uint64_t seed = 0;
  double eps = 0;         // per-term 95% half-width target; 0 = fixed-samples mode
  long long fixed_samples = 0;
  long long pilot = 1000;
  Rational prune_a{1, 1};  // variance-decay exponent; 1 keeps every term
  int workers = 1;
  long long chunk = 4096;
};

struct TermEstimate {
  std::string tree;
  std::string coefficient;  // exact integer, as decimal text
  long long samples = 0;
  double mean = 0;          // of the coefficient-weighted term samples
  double stddev = 0;
  double ci_half_width = 0;
};

struct EstimateResult {
  std::string model;
  std::string kernel;
  int nu = 0;
  int n = 0;
  uint64_t seed = 0;
  std::string alpha;
  std::string pruning_a;
  double eps = 0;
  long long fixed_samples = 0;
  long long pilot = 0;
  long long chunk = 0;
  double value = 0;
  double ci_half_width = 0;
  std::vector<TermEstimate> terms;        // first row is the plain fine scheme
  std::vector<std::string> pruned_trees;  // dropped by the variance cutoff
};

namespace detail {

// One n-step run of the scheme at step T/n: the estimator's zeroth row (the
// single-step term and its first correction collapse to exactly this).
template <class Kernel>
double base_sample(const Kernel& kernel, const ModelSpec& model, int n, uint64_t seed,
                   long long s) {
  RngStream rng(seed, 0, static_cast<uint64_t>(s));
  std::vector<double> x(model.x0.begin(), model.x0.end());
  std::vector<double> next(x.size());
  double h = level_step(model.horizon, n, 1);
  for (int k = 0; k < n; ++k) {
    typename Kernel::Noise z = kernel.sample_step(h, rng);
    kernel.apply(h, z, x, next);
    x.swap(next);
  }
  return model.payoff(x);
}

template <class Kernel>
double weighted_term_sample(const Kernel& kernel, const ModelSpec& model, const Tree& tree,
                            double coeff, int n, uint64_t seed, uint64_t stream_index,
                            long long s) {
  RngStream rng(seed, stream_index, static_cast<uint64_t>(s));
  WeightedStateSet ws = gamma_sample(kernel, tree, n, 0, model.horizon, model.x0, rng);
  double v = 0;
  for (size_t i = 0; i < ws.count(); ++i)
    v += static_cast<double>(ws.signs[i]) * model.payoff(ws.state(i));
  return coeff * v;
}

struct TermPlan {
  Tree tree;                 // empty-but-root tree unused for the base row
  std::string tree_str;
  std::string coeff_str;
  double coeff = 1.0;
  uint64_t stream_index = 0;  // 0 is the base row; each sample s draws from
                              // RngStream(seed, stream_index, s)
  long long target = 0;
  std::vector<ChunkAcc> chunks;
  ChunkAcc total;
};

// Runs every plan's chunks over a shared task queue. Sample s of a plan always
// uses the same RNG stream and chunks are merged in index order, so the totals
// do not depend on the worker count.
template <class Kernel>
void run_chunks(const Kernel& proto, const ModelSpec& model, int n, uint64_t seed,
                long long chunk, int workers, std::vector<TermPlan>& plans) {
  struct Task {
    size_t plan;
    long long index;
  };
  std::vector<Task> tasks;
  for (size_t p = 0; p < plans.size(); ++p) {
    TermPlan& pl = plans[p];
    long long nchunks = (pl.target + chunk - 1) / chunk;
    pl.chunks.assign(static_cast<size_t>(nchunks), ChunkAcc{});
    pl.total = ChunkAcc{};
    for (long long c = 0; c < nchunks; ++c) tasks.push_back({p, c});
  }

  std::atomic<size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto work = [&]() {
    Kernel kernel = proto;  // private copy: kernels carry scratch buffers
    try {
      for (;;) {
        if (failed.load(std::memory_order_relaxed)) return;
        size_t t = cursor.fetch_add(1);
        if (t >= tasks.size()) return;
        TermPlan& pl = plans[tasks[t].plan];
        long long lo = tasks[t].index * chunk;
        long long hi = std::min(pl.target, lo + chunk);
        ChunkAcc acc;
        try {
          for (long long s = lo; s < hi; ++s) {
            double v = pl.stream_index == 0
                           ? base_sample(kernel, model, n, seed, s)
                           : weighted_term_sample(kernel, model, pl.tree, pl.coeff, n, seed,
                                                  pl.stream_index, s);
            acc.add(v);
          }
        } catch (const RateBoundViolation& e) {  // keep the type, name the term
          throw RateBoundViolation(e.rate_value, e.bound, pl.tree_str);
        } catch (const std::exception& e) {
          throw std::runtime_error("term " + pl.tree_str + ": " + e.what());
        }
        pl.chunks[static_cast<size_t>(tasks[t].index)] = acc;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!first_error) first_error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  };

  int nthreads = std::max(1, workers);
  if (nthreads == 1 || tasks.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    size_t spawn = std::min<size_t>(static_cast<size_t>(nthreads), tasks.size());
    pool.reserve(spawn);
    for (size_t i = 0; i < spawn; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (TermPlan& pl : plans) {
    for (const ChunkAcc& c : pl.chunks) pl.total.merge(c);
    pl.chunks.clear();
  }
}

template <class Kernel>
std::vector<TermPlan> build_plans(const Kernel&, const ModelSpec&, const EstimateOptions& opt,
                                  std::vector<std::string>* pruned_out) {
  Tree t0 = scheme_tree(opt.nu, 0, opt.alpha);
  std::vector<ForestTerm> terms = forest_of(t0);
  PruneResult pr = prune_forest(terms, opt.nu, opt.prune_a);
  if (pruned_out) {
    pruned_out->clear();
    for (const ForestTerm& t : pr.dropped) pruned_out->push_back(t.tree.to_string());
  }

  std::vector<TermPlan> plans;
  TermPlan base;
  base.tree_str = Tree().to_string();
  base.coeff_str = "1";
  base.coeff = 1.0;
  base.stream_index = 0;
  plans.push_back(std::move(base));
  uint64_t stream = 1;
  for (const ForestTerm& t : pr.kept) {
    if (t.tree.size() == 1) continue;  // the single-node term lives in the base row
    TermPlan pl;
    pl.tree = t.tree;
    pl.tree_str = t.tree.to_string();
    pl.coeff_str = coefficient_string(t, opt.n);
    pl.coeff = coefficient_double(t, opt.n);
    pl.stream_index = stream++;
    plans.push_back(std::move(pl));
  }
  return plans;
}

}  // namespace detail

template <class Kernel>
EstimateResult estimate(const Kernel& kernel, const ModelSpec& model,
                        const EstimateOptions& opt) {
  if (opt.n < 2) throw std::invalid_argument("estimate: n must be >= 2");
  if (opt.nu < 1) throw std::invalid_argument("estimate: nu must be >= 1");
  if (opt.chunk < 1) throw std::invalid_argument("estimate: chunk must be >= 1");
  if (opt.eps <= 0 && opt.fixed_samples <= 0)
    throw std::invalid_argument("estimate: need eps or a fixed sample count");

  std::vector<std::string> pruned;
  std::vector<detail::TermPlan> plans = detail::build_plans(kernel, model, opt, &pruned);
  // Every tree in the forest obeys branching <= order <= nu; the estimator
  // additionally needs n >= branching to place the refined sub-steps.
  for (const detail::TermPlan& pl : plans)
    if (pl.stream_index != 0 && pl.tree.max_branching() > opt.n)
      throw std::invalid_argument("estimate: n must be >= " +
                                  std::to_string(pl.tree.max_branching()) +
                                  " for the order-" + std::to_string(opt.nu) + " forest");

  if (opt.fixed_samples > 0) {
    for (auto& pl : plans) pl.target = opt.fixed_samples;
    detail::run_chunks(kernel, model, opt.n, opt.seed, opt.chunk, opt.workers, plans);
  } else {
    for (auto& pl : plans) pl.target = opt.pilot;
    detail::run_chunks(kernel, model, opt.n, opt.seed, opt.chunk, opt.workers, plans);
    for (auto& pl : plans)
      pl.target = allocate_samples(pl.total.variance(), opt.eps, opt.pilot);
    // The main pass recomputes everything: sample s always draws the same
    // stream, so this only re-partitions work, never changes a sample.
    detail::run_chunks(kernel, model, opt.n, opt.seed, opt.chunk, opt.workers, plans);
  }

  EstimateResult res;
  res.model = model.id;
  res.kernel = Kernel::kName;
  res.nu = opt.nu;
  res.n = opt.n;
  res.seed = opt.seed;
  res.alpha = opt.alpha.to_string();
  res.pruning_a = opt.prune_a.to_string();
  res.eps = opt.eps;
  res.fixed_samples = opt.fixed_samples;
  res.pilot = opt.pilot;
  res.chunk = opt.chunk;
  res.pruned_trees = std::move(pruned);
  double var_sum = 0;
  for (const auto& pl : plans) {
    TermEstimate te;
    te.tree = pl.tree_str;
    te.coefficient = pl.coeff_str;
    te.samples = pl.total.count;
    te.mean = pl.total.mean;
    te.stddev = pl.total.stddev();
    te.ci_half_width = pl.total.ci_half_width();
    res.value += te.mean;
    var_sum += te.ci_half_width * te.ci_half_width;
    res.terms.push_back(std::move(te));
  }
  res.ci_half_width = std::sqrt(var_sum);
  return res;
}

inline EstimateResult estimate_model(const ModelSpec& model, const std::string& kernel_name,
                                     const EstimateOptions& opt) {
  if (kernel_name == "euler") {
    EulerKernel k(model);
    return estimate(k, model, opt);
  }
  if (kernel_name == "ninomiya-victoir") {
    NinomiyaVictoirKernel k(model);
    return estimate(k, model, opt);
  }
  if (kernel_name == "pdmp") {
    PdmpKernel k(model);
    return estimate(k, model, opt);
  }
  throw std::invalid_argument("unknown kernel: " + kernel_name);
}

// ---------------------------------------------------------------------------
// Exact (zero-variance) evaluation for noise-free models. The coefficient
// c(A) equals the number of kappa assignments of A, so c(A) E[Gamma^A] is the
// plain sum of the signed payoff over every assignment — enumerating them
// removes the Monte Carlo entirely when the kernel consumes no noise.

namespace detail {

inline bool next_combination(std::vector<int>& c, int n) {
  int r = static_cast<int>(c.size());
  for (int i = r - 1; i >= 0; --i) {
    if (c[i] < n - r + i) {
      ++c[i];
      for (int j = i + 1; j < r; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

template <class Kernel>
double exact_term_value(const Kernel& kernel, const ModelSpec& model, const Tree& tree, int n) {
  if (!model.diffusion.empty() || model.has_jumps())
    throw std::invalid_argument("exact_term_value: model must be noise-free");
  std::vector<size_t> internal;
  for (size_t i = 0; i < tree.size(); ++i)
    if (tree.child_count_at(i) > 0) internal.push_back(i);
  std::vector<std::vector<int>> kappa(tree.size());
  for (size_t k : internal) {
    int r = tree.child_count_at(k);
    kappa[k].resize(static_cast<size_t>(r));
    for (int j = 0; j < r; ++j) kappa[k][static_cast<size_t>(j)] = j;
  }
  RngStream rng(0, 0, 0);  // consumed only by noise draws the kernel ignores
  double sum = 0;
  for (;;) {
    WeightedStateSet ws =
        gamma_sample_with_kappa(kernel, tree, n, 0, model.horizon, model.x0, kappa, rng);
    for (size_t i = 0; i < ws.count(); ++i)
      sum += static_cast<double>(ws.signs[i]) * model.payoff(ws.state(i));
    size_t pos = 0;  // odometer over the internal nodes' combinations
    while (pos < internal.size()) {
      if (detail::next_combination(kappa[internal[pos]], n)) break;
      int r = tree.child_count_at(internal[pos]);
      for (int j = 0; j < r; ++j) kappa[internal[pos]][static_cast<size_t>(j)] = j;
      ++pos;
    }
    if (pos == internal.size()) break;
  }
  return sum;
}

// The full order-nu estimator value on a noise-free model: deterministic
// n-step base run plus the exact value of every correction term. Errors
// against a reference are pure scheme bias, which is what convergence-order
// measurements want.
template <class Kernel>
double exact_estimate_value(const Kernel& kernel, const ModelSpec& model, int nu, int n,
                            const Rational& alpha, const Rational& prune_a = Rational{1, 1}) {
  if (n < 2) throw std::invalid_argument("exact_estimate_value: n must be >= 2");
  double value = detail::base_sample(kernel, model, n, 0, 0);
  PruneResult pr = prune_forest(forest_of(scheme_tree(nu, 0, alpha)), nu, prune_a);
  for (const ForestTerm& t : pr.kept) {
    if (t.tree.size() == 1) continue;
    if (t.tree.max_branching() > n)
      throw std::invalid_argument("exact_estimate_value: n must be >= " +
                                  std::to_string(t.tree.max_branching()));
    value += exact_term_value(kernel, model, t.tree, n);
  }
  return value;
}

inline double exact_estimate_model(const ModelSpec& model, const std::string& kernel_name,
                                   int nu, int n, const Rational& alpha,
                                   const Rational& prune_a = Rational{1, 1}) {
  if (kernel_name == "euler") {
    EulerKernel k(model);
    return exact_estimate_value(k, model, nu, n, alpha, prune_a);
  }
  if (kernel_name == "ninomiya-victoir") {
    NinomiyaVictoirKernel k(model);
    return exact_estimate_value(k, model, nu, n, alpha, prune_a);
  }
  throw std::invalid_argument("exact evaluation needs a noise-free kernel, not " + kernel_name);
}

// Rough work (elementary kernel steps) of exact_estimate_value at (nu, n):
// per kept term, (number of kappa assignments) x (full-enumeration step count).
// Lets callers decide when exhausting the kappa space stops being a bargain --
// the assignment count is a product of binomials and explodes in both nu and n.
inline double exact_enumeration_units(int nu, int n, const Rational& alpha,
                                      const Rational& prune_a = Rational{1, 1}) {
  PruneResult pr = prune_forest(forest_of(scheme_tree(nu, 0, alpha)), nu, prune_a);
  double total = n;  // the plain base run
  for (const ForestTerm& t : pr.kept) {
    if (t.tree.size() == 1) continue;
    double assignments = 1;
    for (int j : t.branching) {
      if (j == 0) continue;
      double c = 1;
      for (int i = 0; i < j; ++i) c = c * (n - i) / (i + 1);
      assignments *= c;
    }
    total += assignments * static_cast<double>(flat_cost(t.tree, n));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Convergence study: error against the model's reference over a grid of
// (nu, n), plus a fitted order per nu.

struct SweepRow {
  int nu = 0;
  int n = 0;
  double estimate = 0;
  double ci_half_width = 0;
  double abs_error = 0;
  double reference = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::pair<int, double>> slopes;  // nu -> fitted order (NaN if < 2 usable rows)
};

// Least-squares exponent of |error| ~ C n^{-order} over the rows whose error
// is resolved: rows with |error| <= 3 * ci are statistical noise and rows
// with zero error have no logarithm, so both are left out.
inline double fit_slope(const std::vector<SweepRow>& rows) {
  std::vector<double> xs, ys;
  for (const SweepRow& r : rows) {
    if (r.abs_error <= 0 || r.abs_error <= 3.0 * r.ci_half_width) continue;
    xs.push_back(std::log(static_cast<double>(r.n)));
    ys.push_back(std::log(r.abs_error));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double xbar = 0, ybar = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(xs.size());
  ybar /= static_cast<double>(xs.size());
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
  }
  return -sxy / sxx;
}

// Noise-free model + kernel pairs are evaluated by exact kappa enumeration
// where that is affordable (zero-width CI, errors are pure bias) and by Monte
// Carlo over kappa otherwise (200k samples unless base_opt sets a budget);
// noisy models always run the Monte Carlo estimator with base_opt's sampling
// settings. Rows with n below the tree's branching requirement are skipped:
// j sons cannot be placed into fewer than j slots.
inline SweepResult convergence_sweep(const ModelSpec& model, const std::string& kernel_name,
                                     const std::vector<int>& nus, const std::vector<int>& ns,
                                     const EstimateOptions& base_opt) {
  if (!(model.reference.ci_half_width < 1.0))
    throw std::invalid_argument("convergence_sweep: model has no usable reference value");
  bool noise_free = model.diffusion.empty() && !model.has_jumps() && kernel_name != "pdmp";
  SweepResult out;
  for (int nu : nus) {
    int min_n = scheme_tree(nu, 0, base_opt.alpha).max_branching();
    std::vector<SweepRow> nu_rows;
    for (int n : ns) {
      if (n < std::max(2, min_n)) continue;
      SweepRow row;
      row.nu = nu;
      row.n = n;
      row.reference = model.reference.value;
      bool exact = noise_free && exact_enumeration_units(nu, n, base_opt.alpha,
                                                         base_opt.prune_a) <= 3e8;
      if (exact) {
        row.estimate =
            exact_estimate_model(model, kernel_name, nu, n, base_opt.alpha, base_opt.prune_a);
        row.ci_half_width = 0;
      } else {
        EstimateOptions opt = base_opt;
        opt.nu = nu;
        opt.n = n;
        if (noise_free && opt.eps <= 0 && opt.fixed_samples <= 0) opt.fixed_samples = 200000;
        EstimateResult er = estimate_model(model, kernel_name, opt);
        row.estimate = er.value;
        row.ci_half_width = er.ci_half_width;
      }
      row.abs_error = std::abs(row.estimate - model.reference.value);
      nu_rows.push_back(row);
      out.rows.push_back(row);
    }
    out.slopes.emplace_back(nu, fit_slope(nu_rows));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-term variance table at a fixed sample size: empirical variance of each
// coefficient-weighted term next to its cost and the smallest order whose
// forest contains it. This is the data behind the pruning rule.

struct TermVarianceRow {
  std::string tree;
  int min_nu = 0;           // smallest order whose forest contains this tree
  long long cost_units = 0; // leading coefficient of the flat per-sample cost in n
  long long samples = 0;
  double mean = 0;
  double variance = 0;
};

template <class Kernel>
std::vector<TermVarianceRow> term_variance_table(const Kernel& kernel, const ModelSpec& model,
                                                 const EstimateOptions& opt) {
  if (opt.fixed_samples <= 0)
    throw std::invalid_argument("term_variance_table: needs a fixed sample count");
  std::vector<detail::TermPlan> plans = detail::build_plans(kernel, model, opt, nullptr);
  for (auto& pl : plans) pl.target = opt.fixed_samples;
  detail::run_chunks(kernel, model, opt.n, opt.seed, opt.chunk, opt.workers, plans);

  std::vector<std::vector<std::string>> forests_by_nu(static_cast<size_t>(opt.nu) + 1);
  for (int v = 1; v <= opt.nu; ++v)
    for (const ForestTerm& t : forest_of(scheme_tree(v, 0, opt.alpha)))
      forests_by_nu[static_cast<size_t>(v)].push_back(t.tree.to_string());

  std::vector<TermVarianceRow> out;
  for (const auto& pl : plans) {
    TermVarianceRow row;
    row.tree = pl.tree_str;
    row.samples = pl.total.count;
    row.mean = pl.total.mean;
    row.variance = pl.total.variance();
    if (pl.stream_index == 0) {
      row.min_nu = 1;      // the plain scheme underlies every order
      row.cost_units = 1;  // cost n, i.e. coefficient 1
    } else {
      row.cost_units = flat_cost_units(pl.tree);
      for (int v = 1; v <= opt.nu && row.min_nu == 0; ++v)
        for (const std::string& s : forests_by_nu[static_cast<size_t>(v)])
          if (s == pl.tree_str) {
            row.min_nu = v;
            break;
          }
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline std::vector<TermVarianceRow> term_variance_table_model(const ModelSpec& model,
                                                              const std::string& kernel_name,
                                                              const EstimateOptions& opt) {
  if (kernel_name == "euler") {
    EulerKernel k(model);
    return term_variance_table(k, model, opt);
  }
  if (kernel_name == "ninomiya-victoir") {
    NinomiyaVictoirKernel k(model);
    return term_variance_table(k, model, opt);
  }
  if (kernel_name == "pdmp") {
    PdmpKernel k(model);
    return term_variance_table(k, model, opt);
  }
  throw std::invalid_argument("unknown kernel: " + kernel_name);
}

}  // namespace rgrids
