#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "randomgrids/grids.hpp"
#include "randomgrids/rng.hpp"

namespace rgrids {

inline constexpr int kMaxDim = 8;  // state / driving-noise dimension cap

struct Reference {
  double value = 0;
  double ci_half_width = 0;
  std::string provenance;  // "closed-form" or "high-order-run"
};

// Problem description consumed by the kernels. Only the fields of the family
// in use need to be set: drift/diffusion for diffusions (diffusion empty =
// deterministic ODE), strat_drift plus optionally exact flows for the
// splitting kernel, and the jump block for piecewise-deterministic processes.
struct ModelSpec {
  std::string id;
  int dim = 1;
  double horizon = 1.0;
  std::vector<double> x0;
  std::function<double(std::span<const double>)> payoff;

  // dX = b(X) dt + sum_j sigma_j(X) dW^j
  std::function<void(std::span<const double>, std::span<double>)> drift;
  std::vector<std::function<void(std::span<const double>, std::span<double>)>> diffusion;

  // Stratonovich-corrected drift for the splitting kernel, and optional exact
  // flow maps exp(t V): state evolved in place for time t. When a flow is
  // missing the kernel integrates the vector field numerically.
  std::function<void(std::span<const double>, std::span<double>)> strat_drift;
  std::function<void(std::span<double>, double)> drift_flow;
  std::vector<std::function<void(std::span<double>, double)>> diffusion_flows;

  // Jump part: between jumps the state follows drift; candidate jumps arrive
  // with intensity mark_mass * rate_bound and are accepted with probability
  // rate(x)/rate_bound (thinning). jump writes the post-jump state.
  std::function<void(double, std::span<const double>, std::span<double>)> jump;
  std::function<double(std::span<const double>)> rate;
  double rate_bound = 0;
  double mark_mass = 1.0;
  std::function<double(RngStream&)> sample_mark;

  Reference reference;

  bool has_jumps() const { return static_cast<bool>(rate); }
};

// Thrown when the thinning bound is violated at a visited state; the run
// cannot be salvaged because acceptance probabilities above 1 silently skew
// the law, so this is a hard error.
struct RateBoundViolation : std::runtime_error {
  double rate_value;
  double bound;
  std::string term;  // filled in by the estimator to point at the offending term
  RateBoundViolation(double r, double b, std::string in_term = {})
      : std::runtime_error("jump rate " + std::to_string(r) + " exceeds declared bound " +
                           std::to_string(b) +
                           (in_term.empty() ? std::string{} : " in term " + in_term)),
        rate_value(r),
        bound(b),
        term(std::move(in_term)) {}
};

// ---------------------------------------------------------------------------
// Noise payloads. A Noise is everything one elementary step consumes; coarse
// steps are driven by the aggregate of the fine noises they span, which is
// what couples the two arms of every correction.

struct GaussianNoise {
  std::array<double, kMaxDim> dw{};  // Brownian increments over the step
  int m = 0;                         // number of driving Brownian components
};

struct NvNoise {
  std::array<double, kMaxDim> dw{};
  int m = 0;
  uint8_t rho = 0;  // field-ordering coin of the splitting
};

struct PdmpEvent {
  double t;  // offset within the step, in [0, dur)
  double z;  // mark
  double u;  // thinning uniform
};

struct PdmpNoise {
  double dur = 0;  // step length the events live on
  std::vector<PdmpEvent> events;  // ascending t
};

// ---------------------------------------------------------------------------
// Kernels. Each exposes the same surface:
//   sample_step(delta, rng)            one step's noise
//   sample_fine(delta, nsub, rng, out) noises of nsub sub-steps of delta/nsub
//   aggregate(fines)                   the coarse noise coupling those fines
//   apply(delta, noise, x, out)       the deterministic step map
// apply never touches an RNG, so replaying recorded noises reproduces states
// exactly; its x and out spans must not alias. Instances hold scratch
// buffers: copy per thread, don't share.

class EulerKernel {
 public:
  using Noise = GaussianNoise;
  static constexpr const char* kName = "euler";

  explicit EulerKernel(const ModelSpec& model);

  int dim() const { return dim_; }

  Noise sample_step(double delta, RngStream& rng) const;
  void sample_fine(double delta, int nsub, RngStream& rng, std::vector<Noise>& out) const;
  static Noise aggregate(std::span<const Noise> fines);
  void apply(double delta, const Noise& z, std::span<const double> x, std::span<double> out) const;

 private:
  const ModelSpec* model_;
  int dim_;
  int brownian_;
  mutable std::array<double, kMaxDim> b_, col_;
};

class NinomiyaVictoirKernel {
 public:
  using Noise = NvNoise;
  static constexpr const char* kName = "ninomiya-victoir";

  // substep_cap bounds the RK4 substep used for flows without a closed form;
  // 0 means delta/4 per apply call.
  explicit NinomiyaVictoirKernel(const ModelSpec& model, double substep_cap = 0.0);

  int dim() const { return dim_; }

  Noise sample_step(double delta, RngStream& rng) const;
  void sample_fine(double delta, int nsub, RngStream& rng, std::vector<Noise>& out) const;
  // Brownian increments add; the ordering coin of the block is the first
  // sub-step's coin.
  static Noise aggregate(std::span<const Noise> fines);
  void apply(double delta, const Noise& z, std::span<const double> x, std::span<double> out) const;

 private:
  void flow(int field, std::span<double> x, double t, double cap) const;  // field -1 = drift

  const ModelSpec* model_;
  int dim_;
  int brownian_;
  double substep_cap_;
  mutable std::array<double, kMaxDim> k1_, k2_, k3_, k4_, tmp_;
};

class PdmpKernel {
 public:
  using Noise = PdmpNoise;
  static constexpr const char* kName = "pdmp";

  explicit PdmpKernel(const ModelSpec& model);

  int dim() const { return dim_; }

  Noise sample_step(double delta, RngStream& rng) const;
  // One Poisson stream on [0, delta) split by sub-interval, so the
  // concatenation of the fines is distributed exactly like one coarse draw.
  void sample_fine(double delta, int nsub, RngStream& rng, std::vector<Noise>& out) const;
  static Noise aggregate(std::span<const Noise> fines);
  // Drift over the whole step first, then the step's candidate jumps in time
  // order, each accepted iff u <= rate(current)/rate_bound.
  void apply(double delta, const Noise& z, std::span<const double> x, std::span<double> out) const;

 private:
  const ModelSpec* model_;
  int dim_;
  mutable std::array<double, kMaxDim> b_, post_;
};

// ---------------------------------------------------------------------------
// Replays recorded elementary noises along a sub-grid. `g` must be a
// coarsening of `full` (same interval, points a subset), and step_noises must
// hold one noise per step of `full`, in time order. Each step of g consumes
// the aggregate of the full-grid noises it spans. This is the straight-line
// evaluator the branching estimator is checked against.
template <class Kernel>
void run_on_grid(const Kernel& kernel, const Grid& g, const Grid& full,
                 std::span<const typename Kernel::Noise> step_noises, double T,
                 std::span<const double> x0, std::span<double> out) {
  if (!full.refines(g))
    throw std::invalid_argument("run_on_grid: grid is not a coarsening of the reference grid");
  if (step_noises.size() != full.step_count())
    throw std::invalid_argument("run_on_grid: need one noise per reference step");

  int dim = static_cast<int>(x0.size());
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> next(dim);
  std::vector<typename Kernel::Noise> span_noises;
  size_t jf = 0;  // cursor into full grid steps
  for (size_t k = 0; k + 1 < g.times.size(); ++k) {
    span_noises.clear();
    if (full.times[jf] != g.times[k])
      throw std::logic_error("run_on_grid: grids misaligned");
    while (full.times[jf] < g.times[k + 1]) {
      span_noises.push_back(step_noises[jf]);
      ++jf;
    }
    typename Kernel::Noise agg =
        span_noises.size() == 1 ? span_noises.front() : Kernel::aggregate(span_noises);
    double delta = level_step(T, g.n, g.level + g.step_levels[k]);
    kernel.apply(delta, agg, x, next);
    std::copy(next.begin(), next.end(), x.begin());
  }
  std::copy(x.begin(), x.end(), out.begin());
}

}  // namespace rgrids
