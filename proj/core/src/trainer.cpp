#include "alignahead/trainer.hpp"

#include <cmath>
#include <sstream>

#include "alignahead/errors.hpp"
#include "alignahead/metrics.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

TrainConfig TrainConfig::citation() { return TrainConfig{}; }

TrainConfig TrainConfig::ppi() {
  TrainConfig cfg;
  cfg.lr = Real(0.005);
  cfg.weight_decay = Real(0);
  return cfg;
}

std::uint64_t student_seed(std::uint64_t run_seed, std::size_t k) {
  // splitmix64 finalizer over (seed, k)
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(k) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trainer::Trainer(std::vector<StudentModel> students, const CsrGraph& graph, TrainConfig cfg)
    : students_(std::move(students)), graph_(graph), cfg_(cfg) {
  if (students_.empty()) throw ConfigError("trainer needs at least one student");
  cfg_.distill.validate();
  if (cfg_.eval_every == 0) throw ConfigError("eval_every must be positive");
  graph_.require_trainable();
  for (std::size_t k = 0; k < students_.size(); ++k) {
    const StudentModel& s = students_[k];
    if (s.depth() != students_[0].depth()) {
      throw ConfigError("student " + std::to_string(k + 1) + " has depth " +
                        std::to_string(s.depth()) + ", student 1 has " +
                        std::to_string(students_[0].depth()));
    }
    if (s.num_classes() != graph_.num_classes()) {
      throw ConfigError("student " + std::to_string(k + 1) + " predicts " +
                        std::to_string(s.num_classes()) + " classes, graph has " +
                        std::to_string(graph_.num_classes()));
    }
    if (s.input_dim() != graph_.num_features()) {
      throw ConfigError("student " + std::to_string(k + 1) + " expects " +
                        std::to_string(s.input_dim()) + " features, graph has " +
                        std::to_string(graph_.num_features()));
    }
    optimizers_.emplace_back(s.parameters(), AdamConfig{cfg_.lr, cfg_.weight_decay});
  }
}

LossBreakdown Trainer::half_step(std::size_t k) {
  std::vector<ForwardTrace> peers;
  {
    NoGradGuard no_grad;
    for (std::size_t j = 0; j < students_.size(); ++j) {
      if (j != k) peers.push_back(forward(students_[j], graph_));
    }
  }
  const ForwardTrace self = forward(students_[k], graph_);
  LossBreakdown loss = total_loss(self, peers, graph_, cfg_.distill);
  if (!std::isfinite(loss.total_value)) {
    std::ostringstream msg;
    msg << "non-finite loss for student " << k + 1 << " at epoch " << epoch_ + 1
        << ": ce=" << loss.ce << " ds=" << loss.ds << " fea=" << loss.fea << " str=" << loss.str
        << " total=" << loss.total_value;
    throw TrainingDiverged(msg.str());
  }
  if (loss.total.requires_grad()) backward(loss.total);
  optimizers_[k].step();
  return loss;
}

std::vector<Trainer::Evaluation> Trainer::evaluate(std::size_t epoch,
                                                   const std::vector<LossBreakdown>& losses,
                                                   MetricLog* log) const {
  NoGradGuard no_grad;
  std::vector<Evaluation> out;
  for (std::size_t k = 0; k < students_.size(); ++k) {
    const ForwardTrace trace = forward(students_[k], graph_, false);
    const DenseMatrix& logits = trace.output().value();
    Evaluation ev;
    ev.smoothness = smoothness(logits, graph_);
    const LossBreakdown loss = k < losses.size() ? losses[k] : LossBreakdown{};
    for (NodeSplit split : {NodeSplit::Train, NodeSplit::Val, NodeSplit::Test}) {
      if (graph_.nodes_in(split).empty()) continue;
      const double metric = task_metric(logits, graph_, split);
      if (split == NodeSplit::Train) ev.train = metric;
      if (split == NodeSplit::Val) ev.val = metric;
      if (split == NodeSplit::Test) ev.test = metric;
      if (log) {
        log->add(MetricRow{epoch, k, split, loss.ce, loss.ds, loss.fea, loss.str, loss.total_value,
                           metric, ev.smoothness});
      }
    }
    out.push_back(ev);
  }
  return out;
}

TrainResult Trainer::run(
    const std::function<void(std::size_t, const std::vector<LossBreakdown>&)>& on_epoch) {
  TrainResult result;
  result.students.resize(students_.size());
  std::vector<bool> seen(students_.size(), false);
  const bool has_val = !graph_.nodes_in(NodeSplit::Val).empty();
  for (std::size_t e = 1; e <= cfg_.epochs; ++e) {
    std::vector<LossBreakdown> losses;
    for (std::size_t k = 0; k < students_.size(); ++k) losses.push_back(half_step(k));
    epoch_ = e;
    if (on_epoch) on_epoch(e, losses);
    if (e % cfg_.eval_every != 0 && e != cfg_.epochs) continue;
    const auto evals = evaluate(e, losses, &result.log);
    for (std::size_t k = 0; k < evals.size(); ++k) {
      StudentSummary& s = result.students[k];
      const double selector = has_val ? evals[k].val : evals[k].train;
      if (!seen[k] || selector > s.best_val) {
        seen[k] = true;
        s.best_val = selector;
        s.test_at_best = evals[k].test;
        s.best_epoch = e;
        s.smoothness_at_best = evals[k].smoothness;
      }
      s.final_test = evals[k].test;
      s.final_smoothness = evals[k].smoothness;
    }
  }
  for (std::size_t k = 0; k < result.students.size(); ++k) {
    if (k == 0 || result.students[k].test_at_best > result.headline) {
      result.headline = result.students[k].test_at_best;
      result.best_student = k;
    }
  }
  return result;
}

ALIGNAHEAD_NAMESPACE_END
