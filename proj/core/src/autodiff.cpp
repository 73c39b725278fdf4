#include "alignahead/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

std::atomic<std::uint64_t> g_next_node_id{1};
thread_local bool t_grad_enabled = true;

}  // namespace

DenseMatrix& detail::Node::grad_buffer() {
  if (grad.empty() && !value.empty()) grad = DenseMatrix::zeros_like(value);
  return grad;
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

bool grad_enabled() noexcept { return t_grad_enabled; }

DiffValue DiffValue::make(DenseMatrix value, std::vector<DiffValue> parents,
                          std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  node->id = g_next_node_id.fetch_add(1, std::memory_order_relaxed);
  bool needs = false;
  if (t_grad_enabled) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_);
    node->backward = std::move(backward);
  }
  return DiffValue(std::move(node));
}

DiffValue DiffValue::leaf(DenseMatrix value, bool requires_grad) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  node->id = g_next_node_id.fetch_add(1, std::memory_order_relaxed);
  return DiffValue(std::move(node));
}

DenseMatrix& DiffValue::mutable_value() {
  if (!is_leaf()) throw std::logic_error("mutable_value: only leaves may be modified in place");
  return node_->value;
}

Real DiffValue::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("item: value is " + node_->value.shape_string() + ", not 1x1");
  }
  return node_->value[0];
}

DenseMatrix DiffValue::grad() const {
  if (node_->grad.empty()) return DenseMatrix::zeros_like(node_->value);
  return node_->grad;
}

void DiffValue::zero_grad() { node_->grad = DenseMatrix(); }

DiffValue constant(DenseMatrix value) { return DiffValue::leaf(std::move(value), false); }
DiffValue parameter(DenseMatrix value) { return DiffValue::leaf(std::move(value), true); }
DiffValue detach(const DiffValue& x) { return constant(x.value()); }

void backward(const DiffValue& root) {
  if (root.rows() != 1 || root.cols() != 1) {
    throw ShapeError("backward: root must be 1x1, got " + root.value().shape_string());
  }
  if (!root.requires_grad()) return;

  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<detail::Node*> stack{root.node().get()};
  seen.insert(stack.back());
  while (!stack.empty()) {
    detail::Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const detail::Node* a, const detail::Node* b) { return a->id > b->id; });

  for (detail::Node* n : order) {
    if (!n->parents.empty()) n->grad = DenseMatrix();
  }
  root.node()->grad_buffer()[0] += Real(1);
  for (detail::Node* n : order) {
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  // Interior gradients are scratch space; only leaves keep theirs.
  for (detail::Node* n : order) {
    if (!n->parents.empty()) n->grad = DenseMatrix();
  }
}

ALIGNAHEAD_NAMESPACE_END
