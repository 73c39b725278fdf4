#include "alignahead/dense_matrix.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

using RowMajor = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const DenseMatrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<RowMajor> view(DenseMatrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Real fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    std::ostringstream msg;
    msg << "DenseMatrix: " << data_.size() << " values given for shape " << rows << "x" << cols;
    throw ShapeError(msg.str());
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<Real>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<Real> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("DenseMatrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1);
  return m;
}

void DenseMatrix::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

std::string DenseMatrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void gemm_accumulate(const DenseMatrix& a, bool transpose_a, const DenseMatrix& b,
                     bool transpose_b, DenseMatrix& out, Real alpha) {
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t k = transpose_a ? a.rows() : a.cols();
  const std::size_t kb = transpose_b ? b.cols() : b.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (k != kb || out.rows() != m || out.cols() != n) {
    throw ShapeError("gemm: cannot combine " + a.shape_string() + (transpose_a ? "^T" : "") +
                     " with " + b.shape_string() + (transpose_b ? "^T" : "") + " into " +
                     out.shape_string());
  }
  if (m == 0 || n == 0 || k == 0) return;
  auto o = view(out);
  const auto va = view(a);
  const auto vb = view(b);
  if (!transpose_a && !transpose_b) {
    o.noalias() += alpha * va * vb;
  } else if (transpose_a && !transpose_b) {
    o.noalias() += alpha * va.transpose() * vb;
  } else if (!transpose_a && transpose_b) {
    o.noalias() += alpha * va * vb.transpose();
  } else {
    o.noalias() += alpha * va.transpose() * vb.transpose();
  }
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("multiply: inner dimensions differ (" + a.shape_string() + " * " +
                     b.shape_string() + ")");
  }
  DenseMatrix out(a.rows(), b.cols());
  gemm_accumulate(a, false, b, false, out);
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("max_abs_diff: " + a.shape_string() + " vs " + b.shape_string());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return worst;
}

ALIGNAHEAD_NAMESPACE_END
