#include "randomgrids/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace rgrids {

namespace {
void check_dim(const ModelSpec& m) {
  if (m.dim < 1 || m.dim > kMaxDim)
    throw std::invalid_argument("ModelSpec: dim must be in [1, " + std::to_string(kMaxDim) + "]");
  if (static_cast<int>(m.x0.size()) != m.dim)
    throw std::invalid_argument("ModelSpec: x0 size does not match dim");
}
}  // namespace

// --------------------------------------------------------------------------
// Euler

EulerKernel::EulerKernel(const ModelSpec& model) : model_(&model) {
  check_dim(model);
  if (!model.drift) throw std::invalid_argument("EulerKernel: model has no drift");
  if (model.has_jumps())
    throw std::invalid_argument("EulerKernel: jump models need the pdmp kernel");
  dim_ = model.dim;
  brownian_ = static_cast<int>(model.diffusion.size());
  if (brownian_ > kMaxDim) throw std::invalid_argument("EulerKernel: too many Brownian drivers");
}

EulerKernel::Noise EulerKernel::sample_step(double delta, RngStream& rng) const {
  Noise z;
  z.m = brownian_;
  double sd = std::sqrt(delta);
  for (int j = 0; j < brownian_; ++j) z.dw[j] = sd * rng.normal();
  return z;
}

void EulerKernel::sample_fine(double delta, int nsub, RngStream& rng,
                              std::vector<Noise>& out) const {
  out.clear();
  out.reserve(nsub);
  double sub = delta / nsub;
  for (int k = 0; k < nsub; ++k) out.push_back(sample_step(sub, rng));
}

EulerKernel::Noise EulerKernel::aggregate(std::span<const Noise> fines) {
  if (fines.empty()) throw std::invalid_argument("aggregate: empty noise list");
  Noise agg = fines[0];
  for (size_t k = 1; k < fines.size(); ++k)
    for (int j = 0; j < agg.m; ++j) agg.dw[j] += fines[k].dw[j];
  return agg;
}

void EulerKernel::apply(double delta, const Noise& z, std::span<const double> x,
                        std::span<double> out) const {
  model_->drift(x, std::span<double>(b_.data(), dim_));
  for (int i = 0; i < dim_; ++i) out[i] = x[i] + b_[i] * delta;
  for (int j = 0; j < z.m; ++j) {
    model_->diffusion[j](x, std::span<double>(col_.data(), dim_));
    for (int i = 0; i < dim_; ++i) out[i] += col_[i] * z.dw[j];
  }
}

// --------------------------------------------------------------------------
// Ninomiya-Victoir splitting

NinomiyaVictoirKernel::NinomiyaVictoirKernel(const ModelSpec& model, double substep_cap)
    : model_(&model), substep_cap_(substep_cap) {
  check_dim(model);
  if (!model.strat_drift)
    throw std::invalid_argument("NinomiyaVictoirKernel: model has no Stratonovich drift");
  if (model.has_jumps())
    throw std::invalid_argument("NinomiyaVictoirKernel: jump models need the pdmp kernel");
  dim_ = model.dim;
  brownian_ = static_cast<int>(model.diffusion.size());
  if (brownian_ > kMaxDim)
    throw std::invalid_argument("NinomiyaVictoirKernel: too many Brownian drivers");
}

NinomiyaVictoirKernel::Noise NinomiyaVictoirKernel::sample_step(double delta,
                                                                RngStream& rng) const {
  Noise z;
  z.m = brownian_;
  double sd = std::sqrt(delta);
  for (int j = 0; j < brownian_; ++j) z.dw[j] = sd * rng.normal();
  z.rho = static_cast<uint8_t>(rng.next() & 1u);
  return z;
}

void NinomiyaVictoirKernel::sample_fine(double delta, int nsub, RngStream& rng,
                                        std::vector<Noise>& out) const {
  out.clear();
  out.reserve(nsub);
  double sub = delta / nsub;
  for (int k = 0; k < nsub; ++k) out.push_back(sample_step(sub, rng));
}

NinomiyaVictoirKernel::Noise NinomiyaVictoirKernel::aggregate(std::span<const Noise> fines) {
  if (fines.empty()) throw std::invalid_argument("aggregate: empty noise list");
  Noise agg = fines[0];  // keeps the first sub-step's ordering coin
  for (size_t k = 1; k < fines.size(); ++k)
    for (int j = 0; j < agg.m; ++j) agg.dw[j] += fines[k].dw[j];
  return agg;
}

void NinomiyaVictoirKernel::flow(int field, std::span<double> x, double t, double cap) const {
  if (t == 0) return;
  if (field < 0 && model_->drift_flow) {
    model_->drift_flow(x, t);
    return;
  }
  if (field >= 0 && field < static_cast<int>(model_->diffusion_flows.size()) &&
      model_->diffusion_flows[field]) {
    model_->diffusion_flows[field](x, t);
    return;
  }
  // No closed-form flow: classical RK4 on dy/ds = V(y), s in [0, t], with
  // enough substeps that |substep| <= cap.
  const auto& V = field < 0 ? model_->strat_drift : model_->diffusion[field];
  int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / cap)));
  double h = t / steps;
  int d = dim_;
  for (int s = 0; s < steps; ++s) {
    V(x, std::span<double>(k1_.data(), d));
    for (int i = 0; i < d; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
    V(std::span<const double>(tmp_.data(), d), std::span<double>(k2_.data(), d));
    for (int i = 0; i < d; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
    V(std::span<const double>(tmp_.data(), d), std::span<double>(k3_.data(), d));
    for (int i = 0; i < d; ++i) tmp_[i] = x[i] + h * k3_[i];
    V(std::span<const double>(tmp_.data(), d), std::span<double>(k4_.data(), d));
    for (int i = 0; i < d; ++i)
      x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }
}

void NinomiyaVictoirKernel::apply(double delta, const Noise& z, std::span<const double> x,
                                  std::span<double> out) const {
  std::copy(x.begin(), x.end(), out.begin());
  double cap = substep_cap_ > 0 ? substep_cap_ : delta / 4.0;
  flow(-1, out, delta / 2.0, cap);
  if (z.rho == 0) {
    for (int j = 0; j < z.m; ++j) flow(j, out, z.dw[j], cap);
  } else {
    for (int j = z.m - 1; j >= 0; --j) flow(j, out, z.dw[j], cap);
  }
  flow(-1, out, delta / 2.0, cap);
}

// --------------------------------------------------------------------------
// Piecewise-deterministic (jump) kernel

PdmpKernel::PdmpKernel(const ModelSpec& model) : model_(&model) {
  check_dim(model);
  if (!model.rate || !model.jump || !model.sample_mark)
    throw std::invalid_argument("PdmpKernel: model needs rate, jump and sample_mark");
  if (model.rate_bound <= 0)
    throw std::invalid_argument("PdmpKernel: rate_bound must be positive");
  if (model.mark_mass <= 0)
    throw std::invalid_argument("PdmpKernel: mark_mass must be positive");
  dim_ = model.dim;
}

PdmpKernel::Noise PdmpKernel::sample_step(double delta, RngStream& rng) const {
  Noise z;
  z.dur = delta;
  int k = rng.poisson(model_->mark_mass * model_->rate_bound * delta);
  if (k > 0) {
    std::vector<double> times(k);
    for (double& t : times) t = delta * rng.uniform01();
    std::sort(times.begin(), times.end());
    z.events.reserve(k);
    for (double t : times)
      z.events.push_back(PdmpEvent{t, model_->sample_mark(rng), rng.uniform01()});
  }
  return z;
}

void PdmpKernel::sample_fine(double delta, int nsub, RngStream& rng,
                             std::vector<Noise>& out) const {
  // One candidate-event stream over the whole step, events dealt to the
  // sub-step they fall in. Restriction of a Poisson process to disjoint
  // intervals, so each sub-noise has the right law and they concatenate back
  // to the coarse draw.
  Noise whole = sample_step(delta, rng);
  out.assign(nsub, Noise{});
  double sub = delta / nsub;
  for (int k = 0; k < nsub; ++k) out[k].dur = sub;
  for (const PdmpEvent& e : whole.events) {
    int k = std::min(static_cast<int>(e.t / sub), nsub - 1);
    out[k].events.push_back(PdmpEvent{e.t - k * sub, e.z, e.u});
  }
}

PdmpKernel::Noise PdmpKernel::aggregate(std::span<const Noise> fines) {
  if (fines.empty()) throw std::invalid_argument("aggregate: empty noise list");
  Noise agg;
  for (const Noise& f : fines) {
    for (const PdmpEvent& e : f.events)
      agg.events.push_back(PdmpEvent{agg.dur + e.t, e.z, e.u});
    agg.dur += f.dur;
  }
  return agg;
}

void PdmpKernel::apply(double delta, const Noise& z, std::span<const double> x,
                       std::span<double> out) const {
  // Deterministic motion first, for the full step...
  if (model_->drift) {
    model_->drift(x, std::span<double>(b_.data(), dim_));
    for (int i = 0; i < dim_; ++i) out[i] = x[i] + b_[i] * delta;
  } else {
    std::copy(x.begin(), x.end(), out.begin());
  }
  // ...then the candidate jumps in time order, thinned at the current state.
  for (const PdmpEvent& e : z.events) {
    double lambda = model_->rate(out);
    if (lambda < 0 || lambda > model_->rate_bound)
      throw RateBoundViolation(lambda, model_->rate_bound);
    if (e.u * model_->rate_bound <= lambda) {
      model_->jump(e.z, out, std::span<double>(post_.data(), dim_));
      std::copy(post_.begin(), post_.begin() + dim_, out.begin());
    }
  }
}

}  // namespace rgrids
