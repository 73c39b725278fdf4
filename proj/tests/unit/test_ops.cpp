#include <doctest.h>

#include <cmath>

#include "alignahead/autodiff.hpp"
#include "alignahead/errors.hpp"
#include "alignahead/grad_check.hpp"
#include "test_support.hpp"

using namespace alignahead;
using testing::random_matrix;

namespace {

constexpr double kTol = 1e-7;

// Weighted sum so the upstream gradient is not uniform.
DiffValue probe(const DiffValue& x, std::uint64_t seed) {
  return sum(hadamard(x, constant(random_matrix(x.rows(), x.cols(), seed))));
}

GradCheckResult check(const std::function<DiffValue()>& f, std::vector<DiffValue> params) {
  return grad_check(f, params);
}

}  // namespace

TEST_CASE("grad: matmul, add, sub, hadamard, scale, add_scalar") {
  auto a = parameter(random_matrix(3, 4, 1));
  auto b = parameter(random_matrix(4, 2, 2));
  auto c = parameter(random_matrix(3, 2, 3));
  const auto r = check(
      [&] {
        const auto m = matmul(a, b);
        return probe(add_scalar(scale(sub(add(m, c), hadamard(m, c)), 1.5), 0.25), 10);
      },
      {a, b, c});
  CHECK(r.max_relative_error < kTol);
  CHECK(r.entries_checked == 12 + 8 + 6);
}

TEST_CASE("grad: spmm") {
  const CsrMatrix s = CsrMatrix::from_dense(DenseMatrix::from_rows({{0, 2, 0}, {1, 0, -1}}));
  auto d = parameter(random_matrix(3, 2, 4));
  CHECK(check([&] { return probe(spmm(s, d), 11); }, {d}).max_relative_error < kTol);
  CHECK(max_abs_diff(spmm(s, constant(d.value())).value(), multiply(s.to_dense(), d.value())) < 1e-15);
}

TEST_CASE("grad: add_row_vector, scale_rows, add_n, mean, row_sum") {
  auto x = parameter(random_matrix(4, 3, 5));
  auto bias = parameter(random_matrix(1, 3, 6));
  auto w = parameter(random_matrix(4, 1, 7));
  const auto r = check(
      [&] {
        const auto y = scale_rows(add_row_vector(x, bias), w);
        const std::vector<DiffValue> parts{y, x, y};
        return add(probe(add_n(parts), 12), add(mean(square(x)), probe(row_sum(y), 13)));
      },
      {x, bias, w});
  CHECK(r.max_relative_error < kTol);
}

TEST_CASE("grad: gather_rows with repeats and concat_cols") {
  auto x = parameter(random_matrix(3, 2, 8));
  auto y = parameter(random_matrix(4, 1, 9));
  const IndexArray rows({2, 0, 2, 1});
  const auto r = check(
      [&] {
        const std::vector<DiffValue> parts{gather_rows(x, rows), y};
        return probe(concat_cols(parts), 14);
      },
      {x, y});
  CHECK(r.max_relative_error < kTol);
  const auto g = gather_rows(constant(DenseMatrix::from_rows({{1}, {2}, {3}})), rows);
  CHECK(g.value() == DenseMatrix::from_rows({{3}, {1}, {3}, {2}}));
}

TEST_CASE("grad: every elementwise op away from kinks") {
  // Inputs kept in [0.2, 1.5] so relu/elu/leaky stay off 0 and log is defined.
  for (auto kind : {Elementwise::Relu, Elementwise::Elu, Elementwise::LeakyRelu, Elementwise::Sigmoid,
                    Elementwise::Exp, Elementwise::Log, Elementwise::Square}) {
    auto x = parameter(random_matrix(3, 3, 20, 0.2, 1.5));
    auto neg = parameter(random_matrix(2, 2, 21, -1.5, -0.2));
    const auto r = check(
        [&] { return add(probe(elementwise(kind, x), 15), probe(elementwise(kind == Elementwise::Log ? Elementwise::Square : kind, neg), 16)); },
        {x, neg});
    CAPTURE(static_cast<int>(kind));
    CHECK(r.max_relative_error < kTol);
  }
}

TEST_CASE("grad: power") {
  auto x = parameter(random_matrix(2, 3, 22));
  for (int d : {1, 2, 3, 5}) {
    CHECK(check([&] { return probe(power(x, d), 17); }, {x}).max_relative_error < kTol);
  }
  CHECK(power(constant(DenseMatrix(1, 1, 2.0)), 3).item() == doctest::Approx(8.0));
}

TEST_CASE("grad: row softmax and log softmax") {
  auto x = parameter(random_matrix(3, 4, 23, -3, 3));
  CHECK(check([&] { return probe(row_softmax(x), 18); }, {x}).max_relative_error < kTol);
  CHECK(check([&] { return probe(row_log_softmax(x), 19); }, {x}).max_relative_error < kTol);
  const auto s = row_softmax(constant(DenseMatrix::from_rows({{1000, 1000}})));
  CHECK(s.value()[0] == doctest::Approx(0.5));
}

TEST_CASE("grad: segment softmax and reductions") {
  const EdgeSegments segs(IndexArray({0, 3, 3, 4, 6}));
  auto s = parameter(random_matrix(6, 1, 24, -2, 2));
  CHECK(check([&] { return probe(segment_softmax(s, segs), 25); }, {s}).max_relative_error < kTol);
  auto x = parameter(random_matrix(6, 3, 26));
  for (auto kind : {SegmentReduce::Sum, SegmentReduce::Mean, SegmentReduce::Max}) {
    CHECK(check([&] { return probe(segment_reduce(kind, x, segs), 27); }, {x}).max_relative_error < kTol);
  }
}

TEST_CASE("grad: fused cross-entropies") {
  auto logits = parameter(random_matrix(5, 3, 28, -2, 2));
  const std::vector<int> labels{0, 2, 1, 1, 0};
  const IndexArray rows({0, 1, 3});
  CHECK(check([&] { return softmax_cross_entropy(logits, labels, rows); }, {logits})
            .max_relative_error < kTol);
  const DenseMatrix targets = DenseMatrix::from_rows({{1, 0, 1}, {0, 0, 1}, {1, 1, 1}, {0, 1, 0}, {0, 0, 0}});
  CHECK(check([&] { return sigmoid_cross_entropy(logits, targets, rows); }, {logits})
            .max_relative_error < kTol);

  // Uniform logits: -log(1/C).
  const auto u = softmax_cross_entropy(constant(DenseMatrix(3, 4)), std::vector<int>{0, 1, 2}, IndexArray({0, 1, 2}));
  CHECK(u.item() == doctest::Approx(1.3862943611198906).epsilon(1e-12));
}

TEST_CASE("grad: KL divergences in both arguments") {
  auto p = parameter(random_matrix(4, 3, 29, -1, 1));
  auto q = parameter(random_matrix(4, 3, 30, -1, 1));
  CHECK(check([&] { return kl_divergence(row_softmax(p), row_softmax(q)); }, {p, q}).max_relative_error <
        kTol);
  CHECK(check([&] { return bernoulli_kl_divergence(sigmoid(p), sigmoid(q)); }, {p, q})
            .max_relative_error < kTol);
}

TEST_CASE("KL: closed form and zero target entries") {
  const auto t = constant(DenseMatrix::from_rows({{0.5, 0.5}}));
  const auto q = constant(DenseMatrix::from_rows({{0.9, 0.1}}));
  CHECK(kl_divergence(t, q).item() == doctest::Approx(0.5108256237659907).epsilon(1e-10));
  CHECK(kl_divergence(t, t).item() == doctest::Approx(0.0));
  const auto t0 = constant(DenseMatrix::from_rows({{0.0, 1.0}}));
  CHECK(std::isfinite(kl_divergence(t0, q).item()));
  CHECK(kl_divergence(t0, q).item() == doctest::Approx(-std::log(0.1)).epsilon(1e-9));
  CHECK_THROWS_AS(kl_divergence(t, constant(DenseMatrix(2, 1))), ShapeError);
}

TEST_CASE("KL is nonnegative on 1000 random distribution pairs") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> width(1, 8);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = static_cast<std::size_t>(width(rng));
    const auto p = row_softmax(constant(random_matrix(1, c, rng(), -4, 4)));
    const auto q = row_softmax(constant(random_matrix(1, c, rng(), -4, 4)));
    worst = std::min(worst, static_cast<double>(kl_divergence(p, q).item()));
    worst = std::min(worst, static_cast<double>(bernoulli_kl_divergence(p, q).item()));
  }
  CHECK(worst >= -1e-12);
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(add(constant(DenseMatrix(2, 2)), constant(DenseMatrix(2, 3))), ShapeError);
  CHECK_THROWS_AS(add_row_vector(constant(DenseMatrix(2, 2)), constant(DenseMatrix(2, 2))), ShapeError);
  CHECK_THROWS_AS(gather_rows(constant(DenseMatrix(2, 2)), IndexArray({5})), ShapeError);
  CHECK_THROWS_AS(segment_softmax(constant(DenseMatrix(3, 1)), EdgeSegments(IndexArray({0, 2}))),
                  ShapeError);
}
