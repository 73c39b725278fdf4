#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "alignahead/precision.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Row-major dense matrix. Node-feature matrices keep one row per node.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, Real fill = Real(0));
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<Real>> rows);
  static DenseMatrix identity(std::size_t n);
  static DenseMatrix zeros_like(const DenseMatrix& other) {
    return DenseMatrix(other.rows(), other.cols());
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  Real* data() noexcept { return data_.data(); }
  const Real* data() const noexcept { return data_.data(); }

  bool same_shape(const DenseMatrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  void fill(Real v);
  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

/// out += alpha * op(a) * op(b), where op transposes when the flag is set.
void gemm_accumulate(const DenseMatrix& a, bool transpose_a, const DenseMatrix& b,
                     bool transpose_b, DenseMatrix& out, Real alpha = Real(1));

/// Dense product a * b.
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

/// Largest absolute entrywise difference; shapes must match.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

ALIGNAHEAD_NAMESPACE_END
