#include "alignahead/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

double evaluate(const std::function<DiffValue()>& f) {
  NoGradGuard guard;
  return static_cast<double>(f().item());
}

}  // namespace

GradCheckResult grad_check(const std::function<DiffValue()>& f, std::span<DiffValue> params,
                           const GradCheckOptions& options) {
  std::vector<DenseMatrix> original;
  original.reserve(params.size());
  for (auto& p : params) original.push_back(p.value());

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(-options.kink_jitter, options.kink_jitter);
  const double h = options.step;

  GradCheckResult result;
  for (int attempt = 0;; ++attempt) {
    for (auto& p : params) p.zero_grad();
    backward(f());
    std::vector<DenseMatrix> analytic;
    for (auto& p : params) analytic.push_back(p.grad());
    const double base = evaluate(f);

    bool kink = false;
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t k = 0; k < params.size() && !kink; ++k) {
      DenseMatrix& value = params[k].mutable_value();
      for (std::size_t i = 0; i < value.size(); ++i) {
        const Real saved = value[i];
        value[i] = static_cast<Real>(saved + h);
        const double plus = evaluate(f);
        value[i] = static_cast<Real>(saved - h);
        const double minus = evaluate(f);
        value[i] = saved;

        const double numeric = (plus - minus) / (2.0 * h);
        const double forward = (plus - base) / h;
        const double backward_diff = (base - minus) / h;
        if (std::abs(forward - backward_diff) >
            options.kink_tolerance * std::max(1.0, std::abs(numeric))) {
          kink = true;
          break;
        }
        const double a = static_cast<double>(analytic[k][i]);
        const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, std::abs(a - numeric) / denom);
        ++checked;
      }
    }

    if (!kink) {
      result.max_relative_error = worst;
      result.entries_checked = checked;
      break;
    }
    if (attempt >= options.max_kink_retries) {
      result.kink_unresolved = true;
      result.max_relative_error = worst;
      result.entries_checked = checked;
      break;
    }
    ++result.kink_retries;
    for (auto& p : params)
      for (auto& v : p.mutable_value().values()) v = static_cast<Real>(v + jitter(rng));
  }

  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k].mutable_value() = original[k];
    params[k].zero_grad();
  }
  return result;
}

ALIGNAHEAD_NAMESPACE_END
