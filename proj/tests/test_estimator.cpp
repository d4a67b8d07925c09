#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "randomgrids/estimator.hpp"
#include "randomgrids/models.hpp"
#include "randomgrids/report.hpp"
#include "test_support.hpp"

using namespace rgrids;

TEST_CASE("sample allocation: exact ratio, floor, and validation") {
  // 1.96^2 * 1e-3 / (2e-4)^2 is exactly 96040; the guard must not let the
  // double products push it to 96041.
  CHECK(allocate_samples(1e-3, 2e-4, 1000) == 96040);
  CHECK(allocate_samples(0.0, 1e-3, 1000) == 1000);    // zero pilot variance
  CHECK(allocate_samples(1e-9, 0.5, 2000) == 2000);    // tiny need, pilot floor
  CHECK(allocate_samples(1.0, 1e-2, 100) == 38416);    // 1.96^2 * 1e4
  CHECK_THROWS_AS(allocate_samples(1.0, 0.0, 10), std::invalid_argument);
}

TEST_CASE("welford chunks merge to the single-pass result") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> dist(3.0, 2.0);
  std::vector<double> xs(10000);
  for (double& x : xs) x = dist(gen);

  ChunkAcc whole;
  for (double x : xs) whole.add(x);

  for (size_t chunk_size : {1u, 7u, 100u, 4096u, 10000u}) {
    std::vector<ChunkAcc> chunks;
    for (size_t i = 0; i < xs.size(); i += chunk_size) {
      ChunkAcc c;
      for (size_t j = i; j < std::min(xs.size(), i + chunk_size); ++j) c.add(xs[j]);
      chunks.push_back(c);
    }
    ChunkAcc merged;
    for (const ChunkAcc& c : chunks) merged.merge(c);
    CHECK(merged.count == whole.count);
    CHECK(merged.mean == doctest::Approx(whole.mean).epsilon(1e-13));
    CHECK(merged.variance() == doctest::Approx(whole.variance()).epsilon(1e-11));
  }
}

TEST_CASE("slope fit: exact power law, noise rows excluded") {
  std::vector<SweepRow> rows;
  for (int n : {2, 4, 8, 16}) {
    SweepRow r;
    r.n = n;
    r.abs_error = 7.0 * std::pow(n, -2.0);
    r.ci_half_width = 0;
    rows.push_back(r);
  }
  CHECK(fit_slope(rows) == doctest::Approx(2.0).epsilon(1e-9));

  // A row drowned in statistical noise must not distort the fit.
  SweepRow junk;
  junk.n = 32;
  junk.abs_error = 1e-9;
  junk.ci_half_width = 1e-6;
  rows.push_back(junk);
  CHECK(fit_slope(rows) == doctest::Approx(2.0).epsilon(1e-9));

  CHECK(std::isnan(fit_slope(std::vector<SweepRow>{rows.back()})));
}

TEST_CASE("same seed reproduces, different seed differs") {
  ModelSpec m = make_sde_quadratic();
  EstimateOptions o;
  o.nu = 2;
  o.n = 3;
  o.fixed_samples = 2000;
  o.seed = 123;
  EstimateResult a = estimate_model(m, "euler", o);
  EstimateResult b = estimate_model(m, "euler", o);
  CHECK(report_json(a) == report_json(b));
  o.seed = 124;
  EstimateResult c = estimate_model(m, "euler", o);
  CHECK(a.value != c.value);
}

TEST_CASE("worker count never changes the report bytes") {
  ModelSpec m = make_sde_quadratic();
  EstimateOptions o;
  o.nu = 3;
  o.n = 4;
  o.fixed_samples = 3000;
  o.chunk = 256;  // force many chunks
  o.seed = 7;
  o.workers = 1;
  EstimateResult a = estimate_model(m, "euler", o);
  o.workers = 4;
  EstimateResult b = estimate_model(m, "euler", o);
  CHECK(report_json(a) == report_json(b));

  // eps mode too: pilot then allocation must stay scheduling-independent.
  EstimateOptions e;
  e.nu = 2;
  e.n = 3;
  e.eps = 2e-3;
  e.pilot = 500;
  e.chunk = 128;
  e.seed = 99;
  e.workers = 1;
  EstimateResult c = estimate_model(m, "euler", e);
  e.workers = 3;
  EstimateResult d = estimate_model(m, "euler", e);
  CHECK(report_json(c) == report_json(d));
  CHECK(c.terms.back().samples >= 500);
}

TEST_CASE("estimator structure: base row, coefficients, pruning") {
  ModelSpec m = make_ode_logistic();
  EstimateOptions o;
  o.nu = 4;
  o.n = 4;
  o.fixed_samples = 200;
  o.prune_a = {2, 1};
  EstimateResult r = estimate_model(m, "euler", o);
  REQUIRE(!r.terms.empty());
  CHECK(r.terms[0].tree == "{∅}");
  CHECK(r.terms[0].coefficient == "1");
  CHECK(r.terms[0].ci_half_width == 0.0);  // deterministic base run
  CHECK(r.terms.size() == 8);              // 9 forest terms, one pruned
  REQUIRE(r.pruned_trees.size() == 1);
  CHECK(r.pruned_trees[0] == "{∅,1,11,2,21}");
  double sum = 0;
  for (const TermEstimate& t : r.terms) sum += t.mean;
  CHECK(r.value == doctest::Approx(sum).epsilon(1e-15));

  // Errors for unknown names surface as invalid_argument.
  CHECK_THROWS_AS(estimate_model(m, "no-such-kernel", o), std::invalid_argument);
  CHECK_THROWS_AS(make_model("no-such-model"), std::invalid_argument);
}

TEST_CASE("exact enumeration agrees with Monte Carlo over kappa") {
  ModelSpec m = make_ode_logistic();
  double exact = exact_estimate_model(m, "euler", 3, 3, {1, 1});
  EstimateOptions o;
  o.nu = 3;
  o.n = 3;
  o.fixed_samples = 4000;
  o.seed = 5;
  EstimateResult mc = estimate_model(m, "euler", o);
  CHECK(std::abs(mc.value - exact) <= 4 * mc.ci_half_width + 1e-12);

  // nu = 1: the tree is a single node, the estimator is the plain scheme.
  double plain = exact_estimate_model(m, "euler", 1, 6, {1, 1});
  EstimateOptions p;
  p.nu = 1;
  p.n = 6;
  p.fixed_samples = 10;
  EstimateResult pr = estimate_model(m, "euler", p);
  CHECK(pr.value == doctest::Approx(plain).epsilon(1e-14));
  CHECK(pr.ci_half_width == 0.0);

  CHECK_THROWS_AS(exact_estimate_model(make_sde_quadratic(), "euler", 2, 2, {1, 1}),
                  std::invalid_argument);  // noisy model
  CHECK_THROWS_AS(exact_estimate_model(m, "euler", 4, 2, {1, 1}),
                  std::invalid_argument);  // n below branching need
}

TEST_CASE("enumeration cost model grows where it should") {
  double small = exact_enumeration_units(3, 3, {1, 1});
  double big = exact_enumeration_units(5, 10, {1, 1});
  CHECK(small < big);
  CHECK(small < 1e4);
  // and pruning reduces it
  CHECK(exact_enumeration_units(4, 6, {1, 1}, {2, 1}) <
        exact_enumeration_units(4, 6, {1, 1}, {1, 1}));
}

TEST_CASE("weighted first-correction variance stays bounded in n") {
  // std of C(n,1) Gamma^{∅,1} should be roughly flat in n; raw Gamma decays
  // like n^{-3/2} while the coefficient grows like n.
  ModelSpec m = make_sde_quadratic();
  EstimateOptions o;
  o.nu = 2;
  o.fixed_samples = 20000;
  o.seed = 3;
  auto std_at = [&](int n) {
    EstimateOptions local = o;
    local.n = n;
    std::vector<TermVarianceRow> rows = term_variance_table_model(m, "euler", local);
    for (const TermVarianceRow& r : rows)
      if (r.tree == "{∅,1}") return std::sqrt(r.variance);
    REQUIRE(false);
    return 0.0;
  };
  double s4 = std_at(4), s16 = std_at(16);
  CHECK(std::max(s4, s16) / std::min(s4, s16) < 2.0);
}

TEST_CASE("variance table rows follow the canonical forest order") {
  ModelSpec m = make_sde_quadratic();
  EstimateOptions o;
  o.nu = 4;
  o.n = 5;
  o.fixed_samples = 2000;
  std::vector<TermVarianceRow> rows = term_variance_table_model(m, "euler", o);
  std::vector<ForestTerm> f = forest_of(scheme_tree(4, 0, {1, 1}));
  REQUIRE(rows.size() == f.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].tree == f[i].tree.to_string());
    CHECK(rows[i].samples == 2000);
  }
  CHECK(rows[0].min_nu == 1);
  CHECK(rows[0].cost_units == 1);
  CHECK(rows[1].min_nu == 2);   // {∅,1} first appears in the order-2 forest
  CHECK(rows[1].cost_units == 3);

  // Deterministic model: every term variance is zero (beyond roundoff).
  std::vector<TermVarianceRow> ode_rows =
      term_variance_table_model(make_ode_logistic(), "euler", o);
  CHECK(ode_rows[0].variance == 0.0);
}

TEST_CASE("rate bound violations carry the offending term") {
  ModelSpec m = make_pdmp_tcp();
  m.rate_bound = 1.05;  // violated once the drift pushes x past 1.05
  EstimateOptions o;
  o.nu = 2;
  o.n = 2;
  o.fixed_samples = 500;
  bool thrown = false;
  try {
    estimate_model(m, "pdmp", o);
  } catch (const RateBoundViolation& e) {
    thrown = true;
    CHECK(!e.term.empty());
    CHECK(std::string(e.what()).find("in term") != std::string::npos);
  }
  CHECK(thrown);
}

TEST_CASE("convergence sweep: exact rows, skipped infeasible rows, slopes") {
  ModelSpec m = make_ode_logistic();
  EstimateOptions o;
  SweepResult r = convergence_sweep(m, "euler", {2, 3, 4}, {2, 3, 4, 6, 8}, o);
  for (const SweepRow& row : r.rows) {
    CHECK(row.ci_half_width == 0.0);  // all exact at this scale
    if (row.nu == 4) CHECK(row.n >= 3);  // n=2 impossible: root has 3 sons
  }
  REQUIRE(r.slopes.size() == 3);
  for (const auto& [nu, slope] : r.slopes) CHECK(std::abs(slope - nu) < 0.3);

  // Errors decrease along n for each nu.
  for (int nu : {2, 3, 4}) {
    double prev = 1e9;
    for (const SweepRow& row : r.rows)
      if (row.nu == nu) {
        CHECK(row.abs_error < prev);
        prev = row.abs_error;
      }
  }
}
