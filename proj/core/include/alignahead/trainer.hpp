#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "alignahead/adam.hpp"
#include "alignahead/losses.hpp"
#include "alignahead/metric_log.hpp"
#include "alignahead/student.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

struct TrainConfig {
  Real lr = Real(0.001);
  Real weight_decay = Real(1e-4);
  std::size_t epochs = 300;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
  DistillConfig distill;

  /// lr 0.001, weight decay 1e-4, 300 epochs.
  static TrainConfig citation();
  /// lr 0.005, no weight decay, 300 epochs.
  static TrainConfig ppi();
};

/// Seed for student k derived from a run seed.
std::uint64_t student_seed(std::uint64_t run_seed, std::size_t k);

struct StudentSummary {
  double best_val = 0;
  double test_at_best = 0;
  std::size_t best_epoch = 0;
  double smoothness_at_best = 0;
  double final_test = 0;
  double final_smoothness = 0;
};

struct TrainResult {
  MetricLog log;
  std::vector<StudentSummary> students;
  std::size_t best_student = 0;
  /// Highest test-at-best-validation over students.
  double headline = 0;
};

/// Alternating optimization: within an epoch student k = 0..M-1 in turn takes
/// one full-batch Adam step on its total loss while every peer is held fixed.
class Trainer {
 public:
  /// Throws ConfigError when students disagree on depth or class count or
  /// do not fit the graph.
  Trainer(std::vector<StudentModel> students, const CsrGraph& graph, TrainConfig cfg);

  /// One update of student k against fresh peer traces; returns its losses.
  /// Throws TrainingDiverged on a non-finite loss.
  LossBreakdown half_step(std::size_t k);

  /// Evaluates every student and appends to `log`; `losses[k]` fills the
  /// loss columns. Returns per-student (val, test, smoothness) metrics.
  struct Evaluation {
    double train = 0, val = 0, test = 0, smoothness = 0;
  };
  std::vector<Evaluation> evaluate(std::size_t epoch, const std::vector<LossBreakdown>& losses,
                                   MetricLog* log) const;

  /// Runs cfg.epochs epochs. `on_epoch` (optional) sees each epoch's losses.
  TrainResult run(const std::function<void(std::size_t, const std::vector<LossBreakdown>&)>&
                      on_epoch = {});

  std::size_t epoch() const noexcept { return epoch_; }
  const std::vector<StudentModel>& students() const noexcept { return students_; }
  const TrainConfig& config() const noexcept { return cfg_; }

 private:
  std::vector<StudentModel> students_;
  const CsrGraph& graph_;
  TrainConfig cfg_;
  std::vector<Adam> optimizers_;
  std::size_t epoch_ = 0;
};

ALIGNAHEAD_NAMESPACE_END
