#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "randomgrids/kernels.hpp"
#include "randomgrids/models.hpp"
#include "test_support.hpp"

using namespace rgrids;

TEST_CASE("euler step is the explicit increment formula") {
  ModelSpec m = make_sde_quadratic();  // dX = -X^2 dt + 0.2 X dW
  EulerKernel k(m);
  GaussianNoise z;
  z.m = 1;
  z.dw[0] = 0.37;
  double x = 1.3, out = 0;
  k.apply(0.25, z, std::span<const double>(&x, 1), std::span<double>(&out, 1));
  CHECK(out == doctest::Approx(x - x * x * 0.25 + 0.2 * x * 0.37).epsilon(1e-15));
}

TEST_CASE("euler noise statistics and aggregation") {
  ModelSpec m = testsupport::twodim_sde();
  EulerKernel k(m);
  RngStream rng(7, 0, 0);
  const double delta = 0.8;

  double s = 0, ss = 0, cross = 0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    GaussianNoise z = k.sample_step(delta, rng);
    REQUIRE(z.m == 2);
    s += z.dw[0];
    ss += z.dw[0] * z.dw[0];
    cross += z.dw[0] * z.dw[1];
  }
  CHECK(s / N == doctest::Approx(0.0).epsilon(0.02).scale(std::sqrt(delta)));
  CHECK(ss / N == doctest::Approx(delta).epsilon(0.03));
  CHECK(cross / N == doctest::Approx(0.0).epsilon(0.02).scale(delta));

  // sample_fine: nsub noises of delta/nsub each; their aggregate sums exactly.
  std::vector<GaussianNoise> fines;
  k.sample_fine(delta, 5, rng, fines);
  REQUIRE(fines.size() == 5);
  GaussianNoise agg = EulerKernel::aggregate(fines);
  for (int j = 0; j < 2; ++j) {
    double want = 0;
    for (const auto& f : fines) want += f.dw[j];
    CHECK(agg.dw[j] == doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("ninomiya-victoir with no diffusion is the drift flow") {
  ModelSpec m = make_ode_logistic();
  NinomiyaVictoirKernel k(m);
  NvNoise z;
  z.m = 0;
  double x = 0.4, out = 0;
  k.apply(0.5, z, std::span<const double>(&x, 1), std::span<double>(&out, 1));
  // exp((t/2) V0) exp((t/2) V0) = exp(t V0): one logistic flow of duration 0.5
  double flow = x;
  {
    std::span<double> sp(&flow, 1);
    m.drift_flow(sp, 0.5);
  }
  CHECK(out == doctest::Approx(flow).epsilon(1e-12));
}

TEST_CASE("ninomiya-victoir numeric flows match closed-form flows") {
  ModelSpec exact = make_sde_quadratic();
  ModelSpec numeric = exact;
  numeric.drift_flow = nullptr;       // force the RK4 fallback
  numeric.diffusion_flows.clear();
  NinomiyaVictoirKernel ke(exact);
  NinomiyaVictoirKernel kn(numeric, 1e-3);

  RngStream rng(3, 0, 0);
  for (int i = 0; i < 50; ++i) {
    NvNoise z = ke.sample_step(0.2, rng);
    double x = 0.5 + 0.02 * i, a = 0, b = 0;
    ke.apply(0.2, z, std::span<const double>(&x, 1), std::span<double>(&a, 1));
    kn.apply(0.2, z, std::span<const double>(&x, 1), std::span<double>(&b, 1));
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("ninomiya-victoir aggregate keeps the first coin and sums increments") {
  std::vector<NvNoise> fines(3);
  for (int i = 0; i < 3; ++i) {
    fines[i].m = 1;
    fines[i].dw[0] = 0.1 * (i + 1);
    fines[i].rho = static_cast<uint8_t>(i % 2);
  }
  NvNoise agg = NinomiyaVictoirKernel::aggregate(fines);
  CHECK(agg.dw[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(agg.rho == fines[0].rho);
}

TEST_CASE("pdmp apply: drift first, then thinned jumps in order") {
  ModelSpec m = make_pdmp_tcp();
  PdmpKernel k(m);
  PdmpNoise z;
  z.dur = 1.0;
  z.events = {{0.3, 0.0, 0.1}, {0.7, 0.0, 0.9}};
  double x = 1.0, out = 0;
  k.apply(1.0, z, std::span<const double>(&x, 1), std::span<double>(&out, 1));
  // drift: x = 2; event 1: u=0.1 <= 2/e so the jump fires, x = 1;
  // event 2: u=0.9 > 1/e, rejected.
  CHECK(out == doctest::Approx(1.0).epsilon(1e-15));

  z.events[1].u = 0.2;  // now 0.2 <= 1/e: both jumps fire
  k.apply(1.0, z, std::span<const double>(&x, 1), std::span<double>(&out, 1));
  CHECK(out == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pdmp rate bound violations are hard errors") {
  ModelSpec m = make_pdmp_tcp();
  m.rate_bound = 1.5;  // reachable: after unit drift from x0=1 the rate is 2
  PdmpKernel k(m);
  PdmpNoise z;
  z.dur = 1.0;
  z.events = {{0.5, 0.0, 0.99}};
  double x = 1.0, out = 0;
  CHECK_THROWS_AS(
      k.apply(1.0, z, std::span<const double>(&x, 1), std::span<double>(&out, 1)),
      RateBoundViolation);
  try {
    k.apply(1.0, z, std::span<const double>(&x, 1), std::span<double>(&out, 1));
  } catch (const RateBoundViolation& e) {
    CHECK(e.rate_value == doctest::Approx(2.0));
    CHECK(e.bound == doctest::Approx(1.5));
  }
}

TEST_CASE("pdmp fine noises concatenate to one coarse draw") {
  ModelSpec m = make_pdmp_tcp();
  PdmpKernel k(m);
  RngStream rng(11, 2, 3);
  const double delta = 1.0;
  const int nsub = 4;

  long long events = 0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    std::vector<PdmpNoise> fines;
    k.sample_fine(delta, nsub, rng, fines);
    REQUIRE(fines.size() == static_cast<size_t>(nsub));
    PdmpNoise agg = PdmpKernel::aggregate(fines);
    CHECK(agg.dur == doctest::Approx(delta));
    size_t total = 0;
    double prev = -1;
    size_t cursor = 0;
    for (int s = 0; s < nsub; ++s) {
      for (const PdmpEvent& ev : fines[s].events) {
        CHECK(ev.t >= 0);
        CHECK(ev.t < fines[s].dur + 1e-12);
        double shifted = ev.t + s * (delta / nsub);
        REQUIRE(cursor < agg.events.size());
        CHECK(agg.events[cursor].t == doctest::Approx(shifted).epsilon(1e-12));
        CHECK(agg.events[cursor].u == ev.u);
        CHECK(shifted >= prev);
        prev = shifted;
        ++cursor;
        ++total;
      }
    }
    CHECK(agg.events.size() == total);
    events += static_cast<long long>(total);
  }
  // Candidate count is Poisson(rate_bound * delta): mean e with st.err ~ e/sqrt(N).
  double mean = static_cast<double>(events) / N;
  CHECK(mean == doctest::Approx(std::exp(1.0)).epsilon(0.03));
}

TEST_CASE("run_on_grid replays a straight loop and rejects misuse") {
  ModelSpec m = testsupport::twodim_sde();
  EulerKernel k(m);
  RngStream rng(21, 0, 0);

  // A flat 6-step grid at level 1 over [0, h_1], n = 6.
  Grid full;
  full.level = 1;
  full.n = 6;
  full.rel_exp = 1;
  full.times = {0, 1, 2, 3, 4, 5, 6};
  full.step_levels = {1, 1, 1, 1, 1, 1};

  std::vector<GaussianNoise> noises;
  double delta = level_step(1.0, 6, 2);
  for (int i = 0; i < 6; ++i) noises.push_back(k.sample_step(delta, rng));

  std::vector<double> out(2), x = m.x0, next(2);
  run_on_grid(k, full, full, noises, 1.0, m.x0, out);
  for (const auto& z : noises) {
    k.apply(delta, z, x, next);
    x = next;
  }
  CHECK(out[0] == x[0]);
  CHECK(out[1] == x[1]);

  // A legitimate coarsening: the two-point grid spanning the whole interval.
  Grid coarse;
  coarse.level = 1;
  coarse.n = 6;
  coarse.rel_exp = 1;
  coarse.times = {0, 6};
  coarse.step_levels = {0};
  std::vector<double> out2(2);
  run_on_grid(k, coarse, full, noises, 1.0, m.x0, out2);
  GaussianNoise agg = EulerKernel::aggregate(noises);
  std::vector<double> y(2);
  k.apply(level_step(1.0, 6, 1), agg, m.x0, y);
  CHECK(out2[0] == y[0]);
  CHECK(out2[1] == y[1]);

  // Not a coarsening: point 1 is missing from `full`'s times? Reverse roles.
  CHECK_THROWS_AS(run_on_grid(k, full, coarse, noises, 1.0, m.x0, out2),
                  std::invalid_argument);
  std::vector<GaussianNoise> short_noises(noises.begin(), noises.begin() + 3);
  CHECK_THROWS_AS(run_on_grid(k, full, full, short_noises, 1.0, m.x0, out2),
                  std::invalid_argument);
}

TEST_CASE("kernel construction rejects malformed specs") {
  ModelSpec m = make_sde_quadratic();
  m.x0 = {1.0, 2.0};  // dim says 1
  CHECK_THROWS_AS(EulerKernel{m}, std::invalid_argument);
  ModelSpec big = testsupport::twodim_sde();
  big.dim = kMaxDim + 1;
  big.x0.assign(kMaxDim + 1, 0.0);
  CHECK_THROWS_AS(EulerKernel{big}, std::invalid_argument);
}
