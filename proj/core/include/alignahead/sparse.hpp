#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "alignahead/dense_matrix.hpp"
#include "alignahead/precision.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Immutable, cheaply copyable array of indices. Tape closures capture these
/// by value, so the storage outlives any backward pass that needs it.
class IndexArray {
 public:
  IndexArray() : data_(std::make_shared<const std::vector<std::size_t>>()) {}
  explicit IndexArray(std::vector<std::size_t> values)
      : data_(std::make_shared<const std::vector<std::size_t>>(std::move(values))) {}

  std::size_t size() const noexcept { return data_->size(); }
  bool empty() const noexcept { return data_->empty(); }
  std::size_t operator[](std::size_t i) const { return (*data_)[i]; }
  std::span<const std::size_t> span() const noexcept { return *data_; }
  const std::vector<std::size_t>& vector() const noexcept { return *data_; }
  auto begin() const noexcept { return data_->begin(); }
  auto end() const noexcept { return data_->end(); }

  friend bool operator==(const IndexArray& a, const IndexArray& b) {
    return a.data_ == b.data_ || *a.data_ == *b.data_;
  }

 private:
  std::shared_ptr<const std::vector<std::size_t>> data_;
};

/// Contiguous groups over a flat edge list: segment s spans
/// [offset(s), offset(s+1)). Reuses the CSR row structure.
class EdgeSegments {
 public:
  EdgeSegments() : offsets_(std::vector<std::size_t>{0}) {}
  /// Validates: nonempty, starts at 0, monotone.
  explicit EdgeSegments(IndexArray offsets);

  std::size_t num_segments() const noexcept { return offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return offsets_[offsets_.size() - 1]; }
  std::size_t begin(std::size_t s) const { return offsets_[s]; }
  std::size_t end(std::size_t s) const { return offsets_[s + 1]; }
  std::size_t length(std::size_t s) const { return end(s) - begin(s); }
  const IndexArray& offsets() const noexcept { return offsets_; }

  friend bool operator==(const EdgeSegments&, const EdgeSegments&) = default;

 private:
  IndexArray offsets_;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class CsrMatrix {
 public:
  CsrMatrix();
  /// Validates every structural invariant; throws ShapeError on violation.
  CsrMatrix(std::size_t rows, std::size_t cols, IndexArray row_offsets, IndexArray col_indices,
            std::vector<Real> values);

  static CsrMatrix identity(std::size_t n);
  /// Keeps exact nonzeros of a dense matrix.
  static CsrMatrix from_dense(const DenseMatrix& dense);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return col_indices_.size(); }
  const IndexArray& row_offsets() const noexcept { return row_offsets_; }
  const IndexArray& col_indices() const noexcept { return col_indices_; }
  std::span<const Real> values() const noexcept { return *values_; }
  EdgeSegments row_segments() const { return EdgeSegments(row_offsets_); }

  DenseMatrix to_dense() const;
  /// this * dense
  DenseMatrix multiply(const DenseMatrix& dense) const;
  /// out += this^T * dense, scattering through the same CSR arrays.
  void transpose_multiply_accumulate(const DenseMatrix& dense, DenseMatrix& out) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  IndexArray row_offsets_;
  IndexArray col_indices_;
  std::shared_ptr<const std::vector<Real>> values_;
};

ALIGNAHEAD_NAMESPACE_END
