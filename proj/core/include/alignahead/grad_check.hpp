#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "alignahead/autodiff.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

struct GradCheckOptions {
  double step = 1e-6;
  // An entry is treated as sitting on a kink (relu at 0, max-pool tie) when
  // its one-sided differences disagree by more than this, relative.
  double kink_tolerance = 1e-3;
  // On a kink, every parameter is jittered by U(-jitter, jitter) and the
  // check restarts from the new evaluation point.
  double kink_jitter = 1e-3;
  int max_kink_retries = 8;
  std::uint64_t seed = 0x5eed;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  int kink_retries = 0;
  bool kink_unresolved = false;
};

/// Compares backward() against central differences for every entry of every
/// parameter: max |analytic - numeric| / max(1, |analytic|, |numeric|).
/// `f` must rebuild its graph from the current parameter values on each call.
/// Parameter values are restored before returning.
GradCheckResult grad_check(const std::function<DiffValue()>& f, std::span<DiffValue> params,
                           const GradCheckOptions& options = {});

ALIGNAHEAD_NAMESPACE_END
