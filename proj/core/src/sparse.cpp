#include "alignahead/sparse.hpp"

#include <string>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

EdgeSegments::EdgeSegments(IndexArray offsets) : offsets_(std::move(offsets)) {
  if (offsets_.empty() || offsets_[0] != 0) {
    throw ShapeError("EdgeSegments: offsets must be nonempty and start at 0");
  }
  for (std::size_t i = 1; i < offsets_.size(); ++i) {
    if (offsets_[i] < offsets_[i - 1]) throw ShapeError("EdgeSegments: offsets not monotone");
  }
}

CsrMatrix::CsrMatrix()
    : row_offsets_(std::vector<std::size_t>{0}),
      values_(std::make_shared<const std::vector<Real>>()) {}

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, IndexArray row_offsets,
                     IndexArray col_indices, std::vector<Real> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::make_shared<const std::vector<Real>>(std::move(values))) {
  if (row_offsets_.size() != rows_ + 1) {
    throw ShapeError("CsrMatrix: row offsets length " + std::to_string(row_offsets_.size()) +
                     " for " + std::to_string(rows_) + " rows");
  }
  if (row_offsets_[0] != 0 || row_offsets_[rows_] != col_indices_.size()) {
    throw ShapeError("CsrMatrix: row offsets must span [0, nnz]");
  }
  if (values_->size() != col_indices_.size()) {
    throw ShapeError("CsrMatrix: values and column indices differ in length");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::size_t b = row_offsets_[r];
    const std::size_t e = row_offsets_[r + 1];
    if (e < b) throw ShapeError("CsrMatrix: row offsets not monotone");
    for (std::size_t k = b; k < e; ++k) {
      if (col_indices_[k] >= cols_) throw ShapeError("CsrMatrix: column index out of range");
      if (k > b && col_indices_[k] <= col_indices_[k - 1]) {
        throw ShapeError("CsrMatrix: columns unsorted or duplicated in row " + std::to_string(r));
      }
    }
  }
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  return CsrMatrix(n, n, IndexArray(std::move(offsets)), IndexArray(std::move(cols)),
                   std::vector<Real>(n, Real(1)));
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& dense) {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  std::vector<Real> vals;
  for (std::size_t r = 0; r < dense.rows(); ++r) {
    for (std::size_t c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != Real(0)) {
        cols.push_back(c);
        vals.push_back(dense(r, c));
      }
    }
    offsets.push_back(cols.size());
  }
  return CsrMatrix(dense.rows(), dense.cols(), IndexArray(std::move(offsets)),
                   IndexArray(std::move(cols)), std::move(vals));
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix out(rows_, cols_);
  const auto& vals = *values_;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      out(r, col_indices_[k]) = vals[k];
  return out;
}

DenseMatrix CsrMatrix::multiply(const DenseMatrix& dense) const {
  if (dense.rows() != cols_) {
    throw ShapeError("spmm: sparse " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     " times dense " + dense.shape_string());
  }
  const std::size_t k = dense.cols();
  DenseMatrix out(rows_, k);
  const auto& vals = *values_;
  for (std::size_t r = 0; r < rows_; ++r) {
    Real* dst = out.data() + r * k;
    for (std::size_t e = row_offsets_[r]; e < row_offsets_[r + 1]; ++e) {
      const Real w = vals[e];
      const Real* src = dense.data() + col_indices_[e] * k;
      for (std::size_t j = 0; j < k; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

void CsrMatrix::transpose_multiply_accumulate(const DenseMatrix& dense, DenseMatrix& out) const {
  if (dense.rows() != rows_ || out.rows() != cols_ || out.cols() != dense.cols()) {
    throw ShapeError("spmm transpose: shape mismatch");
  }
  const std::size_t k = dense.cols();
  const auto& vals = *values_;
  for (std::size_t r = 0; r < rows_; ++r) {
    const Real* src = dense.data() + r * k;
    for (std::size_t e = row_offsets_[r]; e < row_offsets_[r + 1]; ++e) {
      const Real w = vals[e];
      Real* dst = out.data() + col_indices_[e] * k;
      for (std::size_t j = 0; j < k; ++j) dst[j] += w * src[j];
    }
  }
}

ALIGNAHEAD_NAMESPACE_END
