#include "randomgrids/report.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace rgrids {

namespace {

using ojson = nlohmann::ordered_json;

// Shortest decimal that round-trips the double; NaN/inf have no JSON number
// form and come out as "null", which is also the contract for absent slopes.
std::string num(double x) { return ojson(x).dump(); }

ojson run_block(const EstimateResult& r) {
  ojson run;
  run["mode"] = r.fixed_samples > 0 ? "samples" : "eps";
  run["eps"] = r.eps;
  run["samples"] = r.fixed_samples;
  run["pilot"] = r.pilot;
  run["chunk"] = r.chunk;
  run["alpha"] = r.alpha;
  return run;
}

}  // namespace

std::string report_json(const EstimateResult& r) {
  ojson j;
  j["value"] = r.value;
  j["ci_half_width"] = r.ci_half_width;
  j["nu"] = r.nu;
  j["n"] = r.n;
  j["model"] = r.model;
  j["kernel"] = r.kernel;
  j["seed"] = r.seed;
  j["pruning_a"] = r.pruning_a;
  j["terms"] = ojson::array();
  for (const TermEstimate& t : r.terms) {
    ojson jt;
    jt["tree"] = t.tree;
    jt["coefficient"] = t.coefficient;
    jt["mean"] = t.mean;
    jt["std"] = t.stddev;
    jt["samples"] = t.samples;
    jt["ci_half_width"] = t.ci_half_width;
    j["terms"].push_back(std::move(jt));
  }
  j["pruned_trees"] = r.pruned_trees;
  j["run"] = run_block(r);
  return j.dump(2) + "\n";
}

std::string report_text(const EstimateResult& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s / %s  nu=%d n=%d seed=%llu pruning_a=%s\n", r.model.c_str(),
                r.kernel.c_str(), r.nu, r.n, static_cast<unsigned long long>(r.seed),
                r.pruning_a.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "estimate = %.12g  +/- %.4g (95%%)\n", r.value,
                r.ci_half_width);
  out += buf;
  out += "terms:\n";
  for (const TermEstimate& t : r.terms) {
    std::snprintf(buf, sizeof buf, "  %-28s c=%-10s N=%-10lld mean=% .6e std=%.3e ci=%.3e\n",
                  t.tree.c_str(), t.coefficient.c_str(), t.samples, t.mean, t.stddev,
                  t.ci_half_width);
    out += buf;
  }
  if (!r.pruned_trees.empty()) {
    out += "pruned:";
    for (const std::string& s : r.pruned_trees) out += " " + s;
    out += "\n";
  }
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "nu,n,estimate,ci_half_width,abs_error,reference\n";
  for (const SweepRow& row : r.rows) {
    out += std::to_string(row.nu) + "," + std::to_string(row.n) + "," + num(row.estimate) + "," +
           num(row.ci_half_width) + "," + num(row.abs_error) + "," + num(row.reference) + "\n";
  }
  return out;
}

std::string slopes_json(const SweepResult& r) {
  ojson s;
  for (const auto& [nu, slope] : r.slopes) s[std::to_string(nu)] = slope;
  ojson j;
  j["slopes"] = std::move(s);
  return j.dump() + "\n";
}

std::string sweep_json(const SweepResult& r) {
  ojson rows = ojson::array();
  for (const SweepRow& row : r.rows) {
    ojson jr;
    jr["nu"] = row.nu;
    jr["n"] = row.n;
    jr["estimate"] = row.estimate;
    jr["ci_half_width"] = row.ci_half_width;
    jr["abs_error"] = row.abs_error;
    jr["reference"] = row.reference;
    rows.push_back(std::move(jr));
  }
  ojson slopes;
  for (const auto& [nu, slope] : r.slopes) slopes[std::to_string(nu)] = slope;
  ojson j;
  j["rows"] = std::move(rows);
  j["slopes"] = std::move(slopes);
  return j.dump(2) + "\n";
}

std::string sweep_text(const SweepResult& r) {
  std::string out = " nu    n      estimate      ci_half_width     abs_error\n";
  char buf[160];
  for (const SweepRow& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%3d %4d  %14.8g  %12.4g  %14.6g\n", row.nu, row.n,
                  row.estimate, row.ci_half_width, row.abs_error);
    out += buf;
  }
  out += "slopes:";
  for (const auto& [nu, slope] : r.slopes) {
    if (std::isnan(slope))
      std::snprintf(buf, sizeof buf, "  nu=%d: n/a", nu);
    else
      std::snprintf(buf, sizeof buf, "  nu=%d: %.3f", nu, slope);
    out += buf;
  }
  out += "\n";
  return out;
}

std::string variance_table_json(const std::vector<TermVarianceRow>& rows) {
  ojson arr = ojson::array();
  for (const TermVarianceRow& row : rows) {
    ojson jr;
    jr["tree"] = row.tree;
    jr["std"] = std::sqrt(row.variance);
    jr["variance"] = row.variance;
    jr["mean"] = row.mean;
    jr["min_nu"] = row.min_nu;
    jr["cost_units"] = row.cost_units;
    jr["samples"] = row.samples;
    arr.push_back(std::move(jr));
  }
  return arr.dump(2) + "\n";
}

std::string variance_table_csv(const std::vector<TermVarianceRow>& rows) {
  std::string out = "tree,std,variance,mean,min_nu,cost_units,samples\n";
  for (const TermVarianceRow& row : rows) {
    out += "\"" + row.tree + "\"," + num(std::sqrt(row.variance)) + "," + num(row.variance) +
           "," + num(row.mean) + "," + std::to_string(row.min_nu) + "," +
           std::to_string(row.cost_units) + "," + std::to_string(row.samples) + "\n";
  }
  return out;
}

std::string variance_table_text(const std::vector<TermVarianceRow>& rows) {
  std::string out = "tree                           std         mean        min_nu  cost\n";
  char buf[160];
  for (const TermVarianceRow& row : rows) {
    std::snprintf(buf, sizeof buf, "%-28s %.4e % .4e   %2d   %6lldn\n", row.tree.c_str(),
                  std::sqrt(row.variance), row.mean, row.min_nu, row.cost_units);
    out += buf;
  }
  return out;
}

}  // namespace rgrids
