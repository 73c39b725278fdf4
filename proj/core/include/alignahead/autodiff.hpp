#pragma once

// Reverse-mode differentiation over dense matrices.
//
// Every op returns a new DiffValue whose node records its parents and a
// backward rule. The tape is implicit: nodes are numbered in creation order,
// which is always a valid topological order, and backward() walks the
// ancestors of the root in decreasing creation order. A training step builds
// its graph from scratch; parameters are long-lived leaves that the graph
// references.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alignahead/dense_matrix.hpp"
#include "alignahead/precision.hpp"
#include "alignahead/sparse.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace detail {

struct Node {
  DenseMatrix value;
  DenseMatrix grad;  // allocated on first accumulation
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents that require grad.
  std::function<void(Node&)> backward;
  bool requires_grad = false;
  std::uint64_t id = 0;

  DenseMatrix& grad_buffer();
};

}  // namespace detail

class DiffValue {
 public:
  DiffValue() = default;

  bool defined() const noexcept { return node_ != nullptr; }
  explicit operator bool() const noexcept { return defined(); }

  const DenseMatrix& value() const { return node_->value; }
  /// Mutable access for leaves (parameters, grad-check perturbation).
  DenseMatrix& mutable_value();
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  /// Scalar value of a 1x1 node.
  Real item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->parents.empty(); }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient, or an all-zero matrix of the value's shape if none accumulated.
  DenseMatrix grad() const;
  void zero_grad();

  std::uint64_t id() const { return node_->id; }

  // Construction hook for ops.
  static DiffValue make(DenseMatrix value, std::vector<DiffValue> parents,
                        std::function<void(detail::Node&)> backward);
  static DiffValue leaf(DenseMatrix value, bool requires_grad);

  const std::shared_ptr<detail::Node>& node() const noexcept { return node_; }

 private:
  explicit DiffValue(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// While alive, newly created nodes do not record parents or require grad.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

// --- leaves -----------------------------------------------------------------

DiffValue constant(DenseMatrix value);
DiffValue parameter(DenseMatrix value);
/// Same value, cut from the tape.
DiffValue detach(const DiffValue& x);

/// Seeds d(root)/d(root) = 1 and accumulates into every requires-grad leaf.
/// Interior gradients are recomputed on each call, so calling twice without
/// zeroing leaves doubles their gradients. Throws ShapeError unless root is 1x1.
void backward(const DiffValue& root);

// --- linear algebra ---------------------------------------------------------

DiffValue matmul(const DiffValue& a, const DiffValue& b);
/// Sparse constant times dense value. Backward scatters through s^T.
DiffValue spmm(const CsrMatrix& s, const DiffValue& d);

DiffValue add(const DiffValue& a, const DiffValue& b);
DiffValue sub(const DiffValue& a, const DiffValue& b);
DiffValue hadamard(const DiffValue& a, const DiffValue& b);
DiffValue scale(const DiffValue& x, Real factor);
DiffValue add_scalar(const DiffValue& x, Real offset);
/// x[r, :] + bias[0, :] for every row.
DiffValue add_row_vector(const DiffValue& x, const DiffValue& bias);
/// x[r, :] * w[r, 0] for every row.
DiffValue scale_rows(const DiffValue& x, const DiffValue& w);
/// Sum of equally shaped values.
DiffValue add_n(std::span<const DiffValue> xs);

DiffValue sum(const DiffValue& x);
DiffValue mean(const DiffValue& x);
/// n x k -> n x 1.
DiffValue row_sum(const DiffValue& x);

DiffValue gather_rows(const DiffValue& x, const IndexArray& rows);
DiffValue concat_cols(std::span<const DiffValue> parts);

// --- elementwise ------------------------------------------------------------

enum class Elementwise { Relu, Elu, LeakyRelu, Sigmoid, Exp, Log, Square };

inline constexpr Real kLogEpsilon = Real(1e-12);
inline constexpr Real kLeakySlope = Real(0.2);

/// Log computes log(x + 1e-12); LeakyRelu uses slope 0.2; Elu uses alpha 1.
DiffValue elementwise(Elementwise kind, const DiffValue& x);
inline DiffValue relu(const DiffValue& x) { return elementwise(Elementwise::Relu, x); }
inline DiffValue elu(const DiffValue& x) { return elementwise(Elementwise::Elu, x); }
inline DiffValue leaky_relu(const DiffValue& x) { return elementwise(Elementwise::LeakyRelu, x); }
inline DiffValue sigmoid(const DiffValue& x) { return elementwise(Elementwise::Sigmoid, x); }
inline DiffValue exp(const DiffValue& x) { return elementwise(Elementwise::Exp, x); }
inline DiffValue log(const DiffValue& x) { return elementwise(Elementwise::Log, x); }
inline DiffValue square(const DiffValue& x) { return elementwise(Elementwise::Square, x); }
/// x^d for integer d >= 1.
DiffValue power(const DiffValue& x, int exponent);

// --- softmax family ---------------------------------------------------------

/// Per-row softmax, max-shifted.
DiffValue row_softmax(const DiffValue& x);
/// Per-row log-softmax, max-shifted.
DiffValue row_log_softmax(const DiffValue& x);

/// scores is E x 1. Softmax within each segment; empty segments emit nothing.
DiffValue segment_softmax(const DiffValue& scores, const EdgeSegments& segments);

enum class SegmentReduce { Sum, Mean, Max };

/// x is E x k; output is num_segments x k. Empty segments produce zero rows.
/// Max routes gradient to the first argmax row.
DiffValue segment_reduce(SegmentReduce kind, const DiffValue& x, const EdgeSegments& segments);

// --- fused losses -----------------------------------------------------------

/// Mean over `rows` of -log softmax(logits[r])[labels[r]].
DiffValue softmax_cross_entropy(const DiffValue& logits, std::span<const int> labels,
                                const IndexArray& rows);
/// Mean over (r, c) with r in `rows` of binary cross-entropy with logits.
DiffValue sigmoid_cross_entropy(const DiffValue& logits, const DenseMatrix& targets,
                                const IndexArray& rows);

/// Sum over entries of t * (log(t + eps) - log(q + eps)); zero when t == q.
/// Shapes of target and learner must match. Differentiable in both.
DiffValue kl_divergence(const DiffValue& target, const DiffValue& learner);
/// Sum over entries of the Bernoulli KL between probabilities t and q, with
/// the same shift on all four logs.
DiffValue bernoulli_kl_divergence(const DiffValue& target, const DiffValue& learner);

ALIGNAHEAD_NAMESPACE_END
