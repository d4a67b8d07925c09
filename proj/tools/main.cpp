// Command line front end: inspect scheme trees and correction forests, run
// estimates, sweep convergence orders, and print per-term variance tables.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "randomgrids/estimator.hpp"
#include "randomgrids/forest.hpp"
#include "randomgrids/models.hpp"
#include "randomgrids/report.hpp"
#include "randomgrids/scheme.hpp"

namespace {

using namespace rgrids;

struct Options {
  std::string model;
  std::string kernel;  // empty = the model's default
  std::vector<int> nus{2};
  std::vector<int> ns{5};
  std::string alpha = "1";
  double eps = 0;
  long long samples = 0;
  std::uint64_t seed = 0;
  long long pilot = 1000;
  std::string prune = "none";
  int workers = 1;
  long long chunk = 4096;
  std::string format;
  std::string out;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Rational prune_exponent(const std::string& name) {
  if (name == "none") return {1, 1};
  if (name == "const-sigma") return {3, 2};
  if (name == "ode") return {2, 1};
  throw UsageError("--prune must be one of none, ode, const-sigma");
}

std::string pick_format(const std::string& given, const std::string& fallback,
                        std::initializer_list<const char*> allowed) {
  std::string f = given.empty() ? fallback : given;
  for (const char* a : allowed)
    if (f == a) return f;
  throw UsageError("--format " + f + " not supported by this command");
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file " + out_path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

ModelSpec load_model(Options& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  ModelSpec m = make_model(o.model);  // throws invalid_argument on unknown id
  if (o.kernel.empty()) o.kernel = default_kernel(m);
  bool ok = false;
  for (const std::string& k : supported_kernels(m)) ok = ok || k == o.kernel;
  if (!ok) throw UsageError("model " + o.model + " does not support kernel " + o.kernel);
  return m;
}

EstimateOptions estimate_options(const Options& o, int nu, int n) {
  EstimateOptions e;
  e.nu = nu;
  e.n = n;
  e.alpha = Rational::parse(o.alpha);
  e.seed = o.seed;
  e.eps = o.eps;
  e.fixed_samples = o.samples;
  e.pilot = o.pilot;
  e.prune_a = prune_exponent(o.prune);
  e.workers = o.workers;
  e.chunk = o.chunk;
  return e;
}

void render_tree(const Tree& t, size_t idx, const std::string& prefix, bool last,
                 std::string& out) {
  if (idx == 0) {
    out += t.node(0).to_string() + "\n";
  } else {
    out += prefix + (last ? "└─ " : "├─ ") + t.node(idx).to_string() + "\n";
  }
  std::vector<size_t> kids = t.children_at(idx);
  for (size_t k = 0; k < kids.size(); ++k) {
    std::string next_prefix = idx == 0 ? "" : prefix + (last ? "   " : "│  ");
    render_tree(t, kids[k], next_prefix, k + 1 == kids.size(), out);
  }
}

int cmd_trees(Options& o) {
  if (o.nus.size() != 1) throw UsageError("trees takes a single --nu");
  int nu = o.nus[0];
  int n = o.ns.size() == 1 ? o.ns[0] : 0;  // optional: adds numeric columns
  Rational alpha = Rational::parse(o.alpha);
  std::string format = pick_format(o.format, "text", {"text", "json"});

  Tree t = scheme_tree(nu, 0, alpha);
  std::vector<ForestTerm> terms = forest_of(t);
  if (n > 0 && t.max_branching() > n) n = 0;  // numeric columns undefined below the branching need
  if (format == "json") {
    emit(forest_json(terms, n) + "\n", o.out);
    return 0;
  }

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "scheme tree, order %d, alpha %s: %zu nodes, depth %d, smoothness %d\n", nu,
                alpha.to_string().c_str(), t.size(), t.depth(),
                smoothness_requirement(nu, {alpha, order_params_for("euler").beta}));
  out += buf;
  render_tree(t, 0, "", true, out);
  if (n > 0)
    std::snprintf(buf, sizeof buf, "\nforest: %zu terms (numeric columns at n=%d)\n",
                  terms.size(), n);
  else
    std::snprintf(buf, sizeof buf, "\nforest: %zu terms\n", terms.size());
  out += buf;
  std::snprintf(buf, sizeof buf, "%-32s %-24s %10s %10s\n", "tree", "coefficient", "leafdepth",
                n > 0 ? "cost" : "cost/n");
  out += buf;
  for (const ForestTerm& term : terms) {
    std::string coeff;
    if (n > 0) {
      coeff = coefficient_string(term, n);
    } else {
      for (size_t i = 0; i < term.branching.size(); ++i) {
        if (term.branching[i] == 0) continue;
        coeff += "C(n," + std::to_string(term.branching[i]) + ")";
      }
      if (coeff.empty()) coeff = "1";
    }
    long long cost = n > 0 ? flat_cost(term.tree, n) : flat_cost_units(term.tree);
    std::snprintf(buf, sizeof buf, "%-32s %-24s %10d %10lld\n", term.tree.to_string().c_str(),
                  coeff.c_str(), term.leaf_depth_sum, cost);
    out += buf;
  }
  emit(out, o.out);
  return 0;
}

int cmd_estimate(Options& o) {
  if (o.nus.size() != 1 || o.ns.size() != 1)
    throw UsageError("estimate takes a single --nu and a single --n");
  std::string format = pick_format(o.format, "json", {"json", "text"});
  ModelSpec model = load_model(o);
  if ((o.eps > 0) == (o.samples > 0))
    throw UsageError("estimate needs exactly one of --eps or --samples");
  EstimateResult r = estimate_model(model, o.kernel, estimate_options(o, o.nus[0], o.ns[0]));
  emit(format == "json" ? report_json(r) : report_text(r), o.out);
  return 0;
}

int cmd_convergence(Options& o) {
  if (o.ns.size() < 2) throw UsageError("convergence needs at least two --n values");
  std::string format = pick_format(o.format, "csv", {"csv", "json", "text"});
  ModelSpec model = load_model(o);
  bool exact = model.diffusion.empty() && !model.has_jumps() && o.kernel != "pdmp";
  if (!exact && (o.eps > 0) == (o.samples > 0))
    throw UsageError("convergence needs exactly one of --eps or --samples");
  SweepResult r =
      convergence_sweep(model, o.kernel, o.nus, o.ns, estimate_options(o, o.nus[0], o.ns[0]));
  std::string text;
  if (format == "csv")
    text = sweep_csv(r) + slopes_json(r);
  else if (format == "json")
    text = sweep_json(r);
  else
    text = sweep_text(r);
  emit(text, o.out);
  return 0;
}

int cmd_variance_table(Options& o) {
  if (o.nus.size() != 1 || o.ns.size() != 1)
    throw UsageError("variance-table takes a single --nu and a single --n");
  std::string format = pick_format(o.format, "csv", {"csv", "json", "text"});
  ModelSpec model = load_model(o);
  EstimateOptions e = estimate_options(o, o.nus[0], o.ns[0]);
  e.fixed_samples = o.samples > 0 ? o.samples : o.pilot;  // pilot doubles as the sample count
  e.eps = 0;
  std::vector<TermVarianceRow> rows = term_variance_table_model(model, o.kernel, e);
  std::string text = format == "csv"    ? variance_table_csv(rows)
                     : format == "json" ? variance_table_json(rows)
                                        : variance_table_text(rows);
  emit(text, o.out);
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool with_model) {
  if (with_model) {
    cmd->add_option("--model", o.model, "builtin model id")->required();
    cmd->add_option("--kernel", o.kernel,
                    "one-step kernel (euler, ninomiya-victoir, pdmp); default per model");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--eps", o.eps, "target 95% half-width per term");
    cmd->add_option("--samples", o.samples, "fixed sample count per term (instead of --eps)");
    cmd->add_option("--pilot", o.pilot, "pilot samples per term")->capture_default_str();
    cmd->add_option("--prune", o.prune, "variance pruning rule: none, ode, const-sigma")
        ->capture_default_str();
    cmd->add_option("--workers", o.workers, "worker threads")->capture_default_str();
    cmd->add_option("--chunk", o.chunk, "samples per accumulation chunk")->capture_default_str();
  }
  cmd->add_option("--nu", o.nus, "approximation order (comma list where a sweep is meant)")
      ->delimiter(',');
  cmd->add_option("--n", o.ns, "steps per level (comma list where a sweep is meant)")
      ->delimiter(',');
  cmd->add_option("--alpha", o.alpha, "kernel order exponent used for tree construction")
      ->capture_default_str();
  cmd->add_option("--format", o.format, "output format: json, csv, text (command default)");
  cmd->add_option("--out", o.out, "write output to file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arbitrary-order weak approximation by random-grid corrections"};
  app.require_subcommand(1);

  Options o;
  CLI::App* trees = app.add_subcommand("trees", "print the scheme tree and correction forest");
  add_common(trees, o, false);
  CLI::App* est = app.add_subcommand("estimate", "run one order-nu estimate");
  add_common(est, o, true);
  CLI::App* conv =
      app.add_subcommand("convergence", "error sweep over (nu, n) with fitted orders");
  add_common(conv, o, true);
  CLI::App* var = app.add_subcommand("variance-table", "per-term std / cost table at fixed n");
  add_common(var, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version are success, anything else is usage
  }

  auto started = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    if (trees->parsed())
      rc = cmd_trees(o);
    else if (est->parsed())
      rc = cmd_estimate(o);
    else if (conv->parsed())
      rc = cmd_convergence(o);
    else
      rc = cmd_variance_table(o);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 2;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::fprintf(stderr, "elapsed %.2fs\n", secs);
  return rc;
}
