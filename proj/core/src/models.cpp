#include "randomgrids/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rgrids {

namespace {

// Flow of dx/dt = a(1 - x^2) written without atanh so it is defined for any
// start point that does not hit the pole: x(t) = (p - q) / (p + q) with
// p = (1+x0) e^{2at}, q = 1 - x0.
double logistic_flow(double x0, double a, double t) {
  double p = (1.0 + x0) * std::exp(2.0 * a * t);
  double q = 1.0 - x0;
  return (p - q) / (p + q);
}

}  // namespace

ModelSpec make_ode_logistic() {
  constexpr double a = 0.1;
  ModelSpec m;
  m.id = "ode-logistic";
  m.dim = 1;
  m.horizon = 1.0;
  m.x0 = {0.4};
  m.payoff = [](std::span<const double> x) { return x[0]; };
  m.drift = [](std::span<const double> x, std::span<double> out) {
    out[0] = a * (1.0 - x[0] * x[0]);
  };
  // No noise, so the Stratonovich correction vanishes and the exact flow is
  // available; with it the splitting kernel integrates this model exactly.
  m.strat_drift = m.drift;
  m.drift_flow = [](std::span<double> x, double t) { x[0] = logistic_flow(x[0], a, t); };
  m.reference = {logistic_flow(0.4, a, 1.0), 0.0, "closed-form logistic flow"};
  return m;
}

ModelSpec make_sde_quadratic() {
  ModelSpec m;
  m.id = "sde-quadratic";
  m.dim = 1;
  m.horizon = 1.0;
  m.x0 = {1.0};
  m.payoff = [](std::span<const double> x) { return x[0] * x[0]; };
  m.drift = [](std::span<const double> x, std::span<double> out) { out[0] = -x[0] * x[0]; };
  m.diffusion = {[](std::span<const double> x, std::span<double> out) { out[0] = 0.2 * x[0]; }};
  // b_bar = b - (1/2) sigma sigma' = -x^2 - 0.02 x. Its flow solves the
  // Bernoulli equation dx/dt = -x(x+c), c = 0.02: with K = x0/(x0+c),
  // x(t) = cK / (e^{ct} - K); positive starts stay positive for t >= 0.
  m.strat_drift = [](std::span<const double> x, std::span<double> out) {
    out[0] = -x[0] * x[0] - 0.02 * x[0];
  };
  m.drift_flow = [](std::span<double> x, double t) {
    constexpr double c = 0.02;
    if (x[0] == 0.0) return;
    double k = x[0] / (x[0] + c);
    x[0] = c * k / (std::exp(c * t) - k);
  };
  // sigma(x) = 0.2 x is linear, so its flow is exact scaling.
  m.diffusion_flows = {[](std::span<double> x, double t) { x[0] *= std::exp(0.2 * t); }};
  // Frozen from a high-order run of this library (order 5 corrections on a
  // 5-point base grid); cross-checked against a Crank-Nicolson solve of the
  // backward PDE in tests/test_models.cpp.  Regenerate: tools/freeze_references.
  m.reference = {0.25231888763840132, 0.000128,
                 "order-5 self-run, n=5, eps=5e-05, seed=20260819"};
  return m;
}

ModelSpec make_pdmp_tcp() {
  ModelSpec m;
  m.id = "pdmp-tcp";
  m.dim = 1;
  m.horizon = 1.0;
  m.x0 = {1.0};
  m.payoff = [](std::span<const double> x) { return x[0]; };
  m.drift = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  // Window-halving dynamics: unit upward drift, jump x -> x/2 at rate x.
  // Along any path x <= x0 + T = 2, so e is a strict thinning bound.
  m.jump = [](double, std::span<const double> x, std::span<double> out) { out[0] = 0.5 * x[0]; };
  m.rate = [](std::span<const double> x) { return x[0]; };
  m.rate_bound = std::exp(1.0);
  m.mark_mass = 1.0;
  m.sample_mark = [](RngStream&) { return 0.0; };  // jumps carry no mark
  // Frozen from a high-order run of this library; cross-checked against an
  // exact jump-time-inversion simulation (no time discretisation) in
  // tests/test_models.cpp.  Regenerate: tools/freeze_references.
  m.reference = {1.2586888183570508, 0.000716,
                 "order-5 self-run, n=5, eps=0.0002, seed=20260819"};
  return m;
}

const std::vector<std::string>& builtin_model_ids() {
  static const std::vector<std::string> ids = {"ode-logistic", "sde-quadratic", "pdmp-tcp"};
  return ids;
}

ModelSpec make_model(const std::string& id) {
  if (id == "ode-logistic") return make_ode_logistic();
  if (id == "sde-quadratic") return make_sde_quadratic();
  if (id == "pdmp-tcp") return make_pdmp_tcp();
  throw std::invalid_argument("unknown model id: " + id);
}

std::vector<std::string> supported_kernels(const ModelSpec& model) {
  if (model.has_jumps()) return {"pdmp"};
  std::vector<std::string> out = {"euler"};
  if (model.strat_drift) out.push_back("ninomiya-victoir");
  return out;
}

std::string default_kernel(const ModelSpec& model) {
  return model.has_jumps() ? "pdmp" : "euler";
}

}  // namespace rgrids
