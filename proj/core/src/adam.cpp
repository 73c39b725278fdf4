#include "alignahead/adam.hpp"

#include <cmath>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

AdamState make_adam_state(std::span<const DiffValue> params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.push_back(DenseMatrix::zeros_like(p.value()));
    s.v.push_back(DenseMatrix::zeros_like(p.value()));
  }
  return s;
}

void adam_step(std::span<const DiffValue> params, std::span<const DenseMatrix> grads,
               AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  }
  ++state.t;
  const Real t = static_cast<Real>(state.t);
  const Real c1 = 1 - std::pow(cfg.beta1, t);
  const Real c2 = 1 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    DenseMatrix& theta = DiffValue(params[k]).mutable_value();
    const DenseMatrix& g = grads[k];
    if (!g.same_shape(theta) || !state.m[k].same_shape(theta)) {
      throw ShapeError("adam_step: shape mismatch at parameter " + std::to_string(k));
    }
    Real* th = theta.data();
    const Real* gr = g.data();
    Real* m = state.m[k].data();
    Real* v = state.v[k].data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const Real gi = gr[i] + cfg.weight_decay * th[i];
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * gi * gi;
      th[i] -= cfg.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
}

Adam::Adam(std::vector<DiffValue> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg), state_(make_adam_state(params_)) {}

void Adam::step() {
  std::vector<DenseMatrix> grads;
  grads.reserve(params_.size());
  for (const auto& p : params_) grads.push_back(p.grad());
  adam_step(params_, grads, state_, cfg_);
  for (auto& p : params_) p.zero_grad();
}

ALIGNAHEAD_NAMESPACE_END
