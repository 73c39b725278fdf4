#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alignahead/autodiff.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

struct AdamConfig {
  Real lr = Real(0.001);
  Real weight_decay = Real(0);
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real eps = Real(1e-8);
};

struct AdamState {
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
  std::uint64_t t = 0;
};

/// Zero moments shaped like `params`.
AdamState make_adam_state(std::span<const DiffValue> params);

/// One bias-corrected Adam update with the L2 term folded into the gradient
/// (g + wd * theta). Writes parameter values in place.
void adam_step(std::span<const DiffValue> params, std::span<const DenseMatrix> grads,
               AdamState& state, const AdamConfig& cfg);

/// Parameters plus their moments.
class Adam {
 public:
  Adam(std::vector<DiffValue> params, AdamConfig cfg);
  /// Updates from accumulated grads, then zeroes them.
  void step();
  const AdamState& state() const noexcept { return state_; }
  const AdamConfig& config() const noexcept { return cfg_; }

 private:
  std::vector<DiffValue> params_;
  AdamConfig cfg_;
  AdamState state_;
};

ALIGNAHEAD_NAMESPACE_END
