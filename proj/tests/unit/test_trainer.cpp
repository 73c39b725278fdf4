#include <doctest.h>

#include <cmath>
#include <limits>

#include "alignahead/adam.hpp"
#include "alignahead/datasets.hpp"
#include "alignahead/errors.hpp"
#include "alignahead/trainer.hpp"
#include "test_support.hpp"

using namespace alignahead;

namespace {

CsrGraph sbm_graph(std::uint64_t seed = 0) {
  SbmParams p;  // 4 blocks x 25 nodes, p_in 0.3, p_out 0.02
  p.seed = seed;
  return planetoid_split(generate_sbm(p), 5, 20, 40, seed);
}

std::vector<StudentModel> students_for(const CsrGraph& g, std::size_t m, std::size_t depth,
                                       std::optional<AuxSpec> aux, std::uint64_t seed = 0) {
  ModelSpec spec;
  spec.layers = depth;
  spec.hidden = 16;
  std::vector<StudentModel> out;
  for (std::size_t k = 0; k < m; ++k) {
    out.push_back(build_student(backbone_specs(spec, g.num_features(), g.num_classes()), aux,
                                student_seed(seed, k)));
  }
  return out;
}

TrainConfig quick(std::size_t epochs, Real lr = Real(0.01)) {
  TrainConfig cfg;
  cfg.lr = lr;
  cfg.epochs = epochs;
  return cfg;
}

std::vector<DenseMatrix> values_of(const StudentModel& s) {
  std::vector<DenseMatrix> out;
  for (const auto& p : s.parameters()) out.push_back(p.value());
  return out;
}

}  // namespace

TEST_CASE("adam: zero gradient without weight decay leaves parameters unchanged") {
  auto p = parameter(testing::random_matrix(2, 3, 1));
  const DenseMatrix before = p.value();
  std::vector<DiffValue> params{p};
  auto state = make_adam_state(params);
  const std::vector<DenseMatrix> grads{DenseMatrix(2, 3)};
  for (int i = 0; i < 5; ++i) adam_step(params, grads, state, AdamConfig{});
  CHECK(p.value() == before);
  CHECK(state.t == 5);
}

TEST_CASE("adam: first step with unit gradient moves by about lr") {
  auto p = parameter(DenseMatrix(1, 1, 0.5));
  std::vector<DiffValue> params{p};
  auto state = make_adam_state(params);
  const std::vector<DenseMatrix> grads{DenseMatrix(1, 1, 1.0)};
  adam_step(params, grads, state, AdamConfig{});
  // m_hat = 1, v_hat = 1: step = lr / (1 + eps).
  CHECK(0.5 - p.value()[0] == doctest::Approx(0.001 / (1 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: weight decay enters the gradient") {
  auto p = parameter(DenseMatrix(1, 1, 2.0));
  std::vector<DiffValue> params{p};
  auto state = make_adam_state(params);
  AdamConfig cfg;
  cfg.weight_decay = 0.5;
  adam_step(params, std::vector<DenseMatrix>{DenseMatrix(1, 1)}, state, cfg);
  CHECK(p.value()[0] < 2.0);
  CHECK(state.m[0][0] == doctest::Approx(0.1 * 1.0));  // (1 - beta1) * wd * theta
}

TEST_CASE("adam: reruns are bit-identical; step zeroes gradients") {
  DenseMatrix finals[2];
  for (int run = 0; run < 2; ++run) {
    auto p = parameter(testing::random_matrix(3, 3, 4));
    Adam opt({p}, AdamConfig{0.01, 1e-3});
    const DenseMatrix target = testing::random_matrix(3, 3, 5);
    for (int i = 0; i < 50; ++i) {
      backward(sum(square(sub(p, constant(target)))));
      opt.step();
      const bool stale = p.has_grad() && p.grad() != DenseMatrix(3, 3);
      CHECK_FALSE(stale);
    }
    finals[run] = p.value();
  }
  CHECK(finals[0] == finals[1]);
}

TEST_CASE("half step changes only the trained student") {
  const auto g = sbm_graph();
  Trainer trainer(students_for(g, 3, 3, AuxSpec{}), g, quick(1));
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> before;
    for (const auto& s : trainer.students()) before.push_back(testing::checksum(s.parameters()));
    const auto loss = trainer.half_step(k);
    CHECK(std::isfinite(loss.total_value));
    for (std::size_t j = 0; j < 3; ++j) {
      const double after = testing::checksum(trainer.students()[j].parameters());
      if (j == k) CHECK(after != before[j]);
      else CHECK(after == before[j]);
    }
  }
}

TEST_CASE("alpha = beta = 0 reduces to independent solo runs") {
  const auto g = sbm_graph(1);
  const auto base = students_for(g, 2, 2, std::nullopt, 7);
  TrainConfig cfg = quick(25);
  cfg.distill.alpha = 0;
  cfg.distill.beta = 0;

  Trainer pair({base[0].clone(), base[1].clone()}, g, cfg);
  pair.run();
  for (std::size_t k = 0; k < 2; ++k) {
    Trainer solo({base[k].clone()}, g, cfg);
    solo.run();
    CHECK(values_of(solo.students()[0]) == values_of(pair.students()[k]));
  }
}

TEST_CASE("SBM sanity: baseline and full distillation both exceed 0.9 test accuracy") {
  const auto g = sbm_graph();
  SUBCASE("baseline") {
    TrainConfig cfg = quick(200);
    cfg.distill.alpha = 0;
    cfg.distill.beta = 0;
    Trainer trainer(students_for(g, 1, 2, std::nullopt), g, cfg);
    const auto result = trainer.run();
    CHECK(result.students[0].final_test > 0.9);
    CHECK(result.headline > 0.9);
  }
  SUBCASE("full distillation, two students") {
    Trainer trainer(students_for(g, 2, 2, AuxSpec{}), g, quick(200));
    const auto result = trainer.run();
    for (const auto& s : result.students) CHECK(s.final_test > 0.9);
    CHECK(result.headline > 0.9);
  }
}

TEST_CASE("training is deterministic") {
  const auto g = sbm_graph(2);
  TrainResult results[2];
  std::vector<std::vector<DenseMatrix>> params[2];
  for (int run = 0; run < 2; ++run) {
    Trainer trainer(students_for(g, 2, 3, AuxSpec{}, 3), g, quick(15));
    results[run] = trainer.run();
    for (const auto& s : trainer.students()) params[run].push_back(values_of(s));
  }
  CHECK(results[0].log == results[1].log);
  CHECK(params[0] == params[1]);
}

TEST_CASE("metric log has one row per epoch, student and split") {
  const auto g = sbm_graph();
  TrainConfig cfg = quick(10);
  cfg.eval_every = 3;
  Trainer trainer(students_for(g, 2, 2, AuxSpec{}), g, cfg);
  const auto result = trainer.run();
  // Epochs 3, 6, 9 and the final epoch 10.
  CHECK(result.log.size() == 4 * 2 * 3);
  const auto& rows = result.log.rows();
  CHECK(rows.front().epoch == 3);
  CHECK(rows.back().epoch == 10);
  CHECK(rows.back().student == 1);
  for (const auto& r : rows) CHECK(std::isfinite(r.loss_total));
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  const auto g = sbm_graph();
  auto students = students_for(g, 2, 2, AuxSpec{});
  students[0].parameters()[0].mutable_value()(0, 0) = std::numeric_limits<Real>::quiet_NaN();
  Trainer trainer(std::move(students), g, quick(5));
  try {
    trainer.half_step(0);
    FAIL("expected TrainingDiverged");
  } catch (const TrainingDiverged& e) {
    const std::string msg = e.what();
    CHECK(msg.find("student 1") != std::string::npos);
    CHECK(msg.find("ce=") != std::string::npos);
  }
  CHECK_THROWS_AS(trainer.run(), TrainingDiverged);
}

TEST_CASE("trainer rejects mismatched students") {
  const auto g = sbm_graph();
  auto students = students_for(g, 1, 2, std::nullopt);
  students.push_back(students_for(g, 1, 3, std::nullopt)[0]);
  CHECK_THROWS_AS(Trainer(std::move(students), g, quick(1)), ConfigError);
  CHECK_THROWS_AS(Trainer({}, g, quick(1)), ConfigError);
}

TEST_CASE("heterogeneous pair of equal depth trains") {
  const auto g = sbm_graph();
  ModelSpec gat;
  gat.kind = LayerKind::Gat;
  gat.heads = 2;
  gat.hidden = 8;
  ModelSpec sage;
  sage.kind = LayerKind::SageMean;
  std::vector<StudentModel> students{
      build_student(backbone_specs(gat, g.num_features(), g.num_classes()), AuxSpec{}, 1),
      build_student(backbone_specs(sage, g.num_features(), g.num_classes()), AuxSpec{}, 2)};
  Trainer trainer(std::move(students), g, quick(30));
  const auto result = trainer.run();
  for (const auto& r : result.log.rows()) CHECK(std::isfinite(r.loss_total));
}
