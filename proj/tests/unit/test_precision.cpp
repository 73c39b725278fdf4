#include <doctest.h>

#include <cmath>
#include <string_view>
#include <type_traits>

#include "alignahead/datasets.hpp"
#include "alignahead/grad_check.hpp"
#include "alignahead/trainer.hpp"

using namespace alignahead;

TEST_CASE("single-precision build uses float") {
  static_assert(std::is_same_v<Real, float>);
  CHECK(std::string_view(kPrecisionName) == "f32");
}

TEST_CASE("single precision: gradients agree with finite differences loosely") {
  auto w = parameter(DenseMatrix::from_rows({{0.5f, -0.25f}, {0.75f, 0.1f}}));
  const auto x = constant(DenseMatrix::from_rows({{1.0f, 2.0f}, {-1.0f, 0.5f}}));
  std::vector<DiffValue> params{w};
  GradCheckOptions opt;
  opt.step = 1e-2;
  const auto r = grad_check([&] { return sum(square(elu(matmul(x, w)))); }, params, opt);
  CHECK(r.max_relative_error < 1e-2);
}

TEST_CASE("single precision: SBM training stays finite and learns") {
  SbmParams p;
  const auto g = planetoid_split(generate_sbm(p), 5, 20, 40, 0);
  ModelSpec m;
  std::vector<StudentModel> students;
  for (std::size_t k = 0; k < 2; ++k) {
    students.push_back(build_student(backbone_specs(m, g.num_features(), g.num_classes()), AuxSpec{},
                                     student_seed(0, k)));
  }
  TrainConfig cfg;
  cfg.lr = 0.01f;
  cfg.epochs = 100;
  Trainer trainer(std::move(students), g, cfg);
  const auto result = trainer.run();
  for (const auto& row : result.log.rows()) CHECK(std::isfinite(row.loss_total));
  CHECK(result.headline > 0.8);
}
