#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "randomgrids/estimator.hpp"
#include "randomgrids/models.hpp"

using namespace rgrids;

namespace {

double flow1(const ModelSpec& m, double x, double t) {
  std::vector<double> s{x};
  m.drift_flow(std::span<double>(s), t);
  return s[0];
}

double field1(const std::function<void(std::span<const double>, std::span<double>)>& f, double x) {
  std::vector<double> in{x}, out{0.0};
  f(std::span<const double>(in), std::span<double>(out));
  return out[0];
}

// Independent oracle for the quadratic-drift diffusion: Crank-Nicolson solve
// of the backward equation u_t + b u_x + (sigma^2/2) u_xx = 0, u(T,x) = x^2,
// with b = -x^2 and sigma = 0.2 x. x = 0 is absorbing (both coefficients
// vanish), so u(t,0) = 0 exactly; at the far end we close the system with
// u_xx = 0 (linear extrapolation), whose error cannot reach x0 = 0.4: the
// inward drift carries boundary data no lower than x ~ 0.9 over unit time.
double pde_value_quadratic_sde(double x0, double horizon) {
  const double x_max = 8.0;
  const int m = 8000;                    // dx = 1e-3, x0 lands on node 400
  const int steps = 1000;                // dt = 1e-3
  const double dx = x_max / m;
  const double dt = horizon / steps;

  std::vector<double> u(m + 1);
  for (int i = 0; i <= m; ++i) u[i] = (i * dx) * (i * dx);

  // Per-row operator coefficients: L u|_i = lo_i u_{i-1} + di_i u_i + up_i u_{i+1}.
  std::vector<double> lo(m + 1), di(m + 1), up(m + 1);
  for (int i = 1; i < m; ++i) {
    double x = i * dx;
    double b = -x * x;
    double d = 0.5 * (0.2 * x) * (0.2 * x);
    lo[i] = d / (dx * dx) - b / (2 * dx);
    di[i] = -2 * d / (dx * dx);
    up[i] = d / (dx * dx) + b / (2 * dx);
  }

  // Crank-Nicolson step (I - dt/2 L) u_new = (I + dt/2 L) u_old on i = 1..m-1,
  // with u_0 = 0 and u_m = 2 u_{m-1} - u_{m-2} folded into row m-1.
  std::vector<double> a(m), bb(m), c(m), rhs(m);
  for (int s = 0; s < steps; ++s) {
    for (int i = 1; i < m; ++i) {
      a[i] = -0.5 * dt * lo[i];
      bb[i] = 1.0 - 0.5 * dt * di[i];
      c[i] = -0.5 * dt * up[i];
      rhs[i] = 0.5 * dt * lo[i] * u[i - 1] + (1.0 + 0.5 * dt * di[i]) * u[i] +
               0.5 * dt * up[i] * u[i + 1];
    }
    rhs[m - 1] = 0.5 * dt * lo[m - 1] * u[m - 2] + (1.0 + 0.5 * dt * di[m - 1]) * u[m - 1] +
                 0.5 * dt * up[m - 1] * (2 * u[m - 1] - u[m - 2]);
    a[m - 1] += -c[m - 1];      // u_{m} = 2u_{m-1} - u_{m-2} on the implicit side
    bb[m - 1] += 2 * c[m - 1];
    c[m - 1] = 0;

    // Thomas sweep over i = 1..m-1 (u_0 = 0 contributes nothing).
    for (int i = 2; i < m; ++i) {
      double w = a[i] / bb[i - 1];
      bb[i] -= w * c[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    u[m - 1] = rhs[m - 1] / bb[m - 1];
    for (int i = m - 2; i >= 1; --i) u[i] = (rhs[i] - c[i] * u[i + 1]) / bb[i];
    u[0] = 0;
    u[m] = 2 * u[m - 1] - u[m - 2];
  }

  int i0 = static_cast<int>(std::lround(x0 / dx));
  REQUIRE(std::abs(i0 * dx - x0) < 1e-12);  // x0 must sit on a grid node
  return u[i0];
}

// Independent oracle for the drift-and-halve jump process: between jumps
// x(t) = x_s + (t - s), so the integrated intensity to the next jump is
// x_s tau + tau^2/2. Inverting against an Exp(1) draw gives the exact jump
// time -- no discretisation anywhere.
std::pair<double, double> exact_jump_simulation(long long paths, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> exp1(1.0);
  double sum = 0, sumsq = 0;
  for (long long p = 0; p < paths; ++p) {
    double t = 0, x = 1.0;
    for (;;) {
      double e = exp1(gen);
      double tau = -x + std::sqrt(x * x + 2 * e);
      if (t + tau >= 1.0) {
        x += 1.0 - t;
        break;
      }
      t += tau;
      x = (x + tau) / 2;
    }
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / paths;
  double var = (sumsq - paths * mean * mean) / (paths - 1);
  return {mean, 1.96 * std::sqrt(var / paths)};
}

}  // namespace

TEST_CASE("registry: ids, lookup, kernel support") {
  const std::vector<std::string>& ids = builtin_model_ids();
  REQUIRE(ids.size() == 3);
  for (const std::string& id : ids) CHECK(make_model(id).id == id);
  CHECK_THROWS_AS(make_model("heat-bath"), std::invalid_argument);

  ModelSpec ode = make_ode_logistic();
  CHECK(supported_kernels(ode) == std::vector<std::string>{"euler", "ninomiya-victoir"});
  CHECK(default_kernel(ode) == "euler");
  ModelSpec pdmp = make_pdmp_tcp();
  CHECK(supported_kernels(pdmp) == std::vector<std::string>{"pdmp"});
  CHECK(default_kernel(pdmp) == "pdmp");
}

TEST_CASE("logistic ode: reference equals the closed form") {
  ModelSpec m = make_ode_logistic();
  CHECK(m.dim == 1);
  CHECK(m.horizon == 1.0);
  REQUIRE(m.x0.size() == 1);

  // dx = a(1-x^2) dt with a = 0.1 from x0 = 0.4: x(t) = (p-q)/(p+q) with
  // p = (1+x0) e^{2at}, q = 1-x0. The payoff is the identity.
  double p = 1.4 * std::exp(0.2), q = 0.6;
  CHECK(m.reference.value == doctest::Approx((p - q) / (p + q)).epsilon(1e-15));
  CHECK(m.reference.ci_half_width == 0.0);

  CHECK(field1(m.drift, 0.4) == doctest::Approx(0.1 * (1 - 0.16)).epsilon(1e-15));
  CHECK(m.diffusion.empty());
  std::vector<double> s{0.3};
  CHECK(m.payoff(std::span<const double>(s)) == 0.3);
}

TEST_CASE("drift flows solve their vector fields") {
  for (const std::string& id : {"ode-logistic", "sde-quadratic"}) {
    ModelSpec m = make_model(id);
    REQUIRE(m.drift_flow);
    const auto& field = m.strat_drift ? m.strat_drift : m.drift;
    for (double x : {0.1, 0.4, 0.9}) {
      // derivative at t = 0 matches the field the splitting kernel composes
      double h = 1e-6;
      double dnum = (flow1(m, x, h) - flow1(m, x, -h)) / (2 * h);
      CHECK(dnum == doctest::Approx(field1(field, x)).epsilon(1e-8));
      // semigroup property: running s then t equals running s + t
      double two = flow1(m, flow1(m, x, 0.3), 0.45);
      CHECK(two == doctest::Approx(flow1(m, x, 0.75)).epsilon(1e-12));
    }
  }
}

TEST_CASE("quadratic sde: coefficient wiring") {
  ModelSpec m = make_sde_quadratic();
  REQUIRE(m.diffusion.size() == 1);
  CHECK(field1(m.drift, 0.5) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(field1(m.diffusion[0], 0.5) == doctest::Approx(0.1).epsilon(1e-15));
  // Stratonovich correction: -x^2 - (1/2)(0.2x)(0.2)
  CHECK(field1(m.strat_drift, 0.5) == doctest::Approx(-0.25 - 0.01).epsilon(1e-13));

  REQUIRE(m.diffusion_flows.size() == 1);
  std::vector<double> s{0.7};
  m.diffusion_flows[0](std::span<double>(s), 0.3);
  CHECK(s[0] == doctest::Approx(0.7 * std::exp(0.06)).epsilon(1e-14));
}

TEST_CASE("quadratic sde: frozen reference against a pde solve") {
  ModelSpec m = make_sde_quadratic();
  std::vector<double> probe{3.0};
  REQUIRE(m.payoff(std::span<const double>(probe)) == 9.0);  // oracle assumes x^2
  double pde = pde_value_quadratic_sde(m.x0[0], m.horizon);
  // The reference is a frozen order-5 run; its quoted half-width is the
  // Monte Carlo part only, so leave room for the residual n = 5 bias.
  CHECK(std::abs(pde - m.reference.value) < 6e-4);
}

TEST_CASE("jump model: mechanics and frozen reference against exact simulation") {
  ModelSpec m = make_pdmp_tcp();
  REQUIRE(m.x0 == std::vector<double>{1.0});  // the oracle below starts at 1
  REQUIRE(m.horizon == 1.0);
  std::vector<double> x{1.6}, out{0.0};
  CHECK(m.rate(std::span<const double>(x)) == 1.6);
  m.jump(0.0, std::span<const double>(x), std::span<double>(out));
  CHECK(out[0] == 0.8);
  CHECK(field1(m.drift, 0.3) == 1.0);
  CHECK(m.mark_mass == 1.0);
  // The thinning bound must strictly dominate the largest reachable rate,
  // which is x0 + horizon = 2 (drift 1, jumps only shrink the state).
  CHECK(m.rate_bound > 2.0);

  auto [sim, ci] = exact_jump_simulation(2'000'000, 0xC0FFEE);
  double tol = 3 * std::sqrt(ci * ci + m.reference.ci_half_width * m.reference.ci_half_width);
  CHECK(std::abs(sim - m.reference.value) < tol + 5e-4);  // 5e-4 covers n = 5 bias
}

TEST_CASE("end-to-end smoke: estimates land near the references") {
  // Plain Euler (nu = 1) on the ode: pure first-order bias, about 3e-4 at
  // n = 10 for this flow. Deterministic, so there is no CI to compare with.
  ModelSpec ode = make_ode_logistic();
  double plain = exact_estimate_model(ode, "euler", 1, 10, {1, 1});
  CHECK(std::abs(plain - ode.reference.value) < 1e-3);

  // Second-order corrected diffusion run: bias at n = 4 is ~1e-2.
  ModelSpec sde = make_sde_quadratic();
  EstimateOptions so;
  so.nu = 2;
  so.n = 4;
  so.eps = 2e-3;
  so.pilot = 2000;
  so.seed = 11;
  EstimateResult se = estimate_model(sde, "euler", so);
  CHECK(std::abs(se.value - sde.reference.value) < 3 * se.ci_half_width + 0.01);

  // Same at order 2 under the splitting kernel.
  EstimateResult nv = estimate_model(sde, "ninomiya-victoir", so);
  CHECK(std::abs(nv.value - sde.reference.value) < 3 * nv.ci_half_width + 0.01);

  // Jump model, coarse run: observed bias at (nu=2, n=4) is ~2.5e-2.
  ModelSpec pdmp = make_pdmp_tcp();
  EstimateOptions po;
  po.nu = 2;
  po.n = 4;
  po.fixed_samples = 20000;
  po.seed = 12;
  EstimateResult pe = estimate_model(pdmp, "pdmp", po);
  CHECK(std::abs(pe.value - pdmp.reference.value) < 0.05);
}
