#include "alignahead/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

double accuracy(const DenseMatrix& logits, std::span<const int> labels, const IndexArray& rows) {
  if (rows.empty()) throw std::invalid_argument("accuracy: empty mask");
  std::size_t correct = 0;
  for (std::size_t r : rows) {
    const auto row = logits.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    correct += static_cast<int>(best) == labels[r];
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

double micro_f1(const DenseMatrix& logits, const DenseMatrix& targets, const IndexArray& rows,
                double threshold) {
  if (rows.empty()) throw std::invalid_argument("micro_f1: empty mask");
  if (!logits.same_shape(targets)) throw ShapeError("micro_f1: logits and targets differ in shape");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t r : rows) {
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      const double p = 1.0 / (1.0 + std::exp(-static_cast<double>(logits(r, c))));
      const bool predicted = p > threshold;
      const bool actual = targets(r, c) != Real(0);
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
  }
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double smoothness(const DenseMatrix& embeddings, const CsrGraph& graph) {
  if (embeddings.rows() != graph.num_nodes()) throw ShapeError("smoothness: row count mismatch");
  if (graph.num_edges() == 0) return 0.0;
  std::vector<double> norms(embeddings.rows());
  for (std::size_t r = 0; r < embeddings.rows(); ++r) {
    double s = 0;
    for (Real v : embeddings.row(r)) s += static_cast<double>(v) * static_cast<double>(v);
    norms[r] = std::sqrt(s);
  }
  double total = 0;
  const auto& src = graph.edge_sources();
  const auto& dst = graph.edge_targets();
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const std::size_t u = src[e], v = dst[e];
    if (norms[u] == 0 || norms[v] == 0) continue;
    const auto a = embeddings.row(u);
    const auto b = embeddings.row(v);
    double dot = 0;
    for (std::size_t c = 0; c < a.size(); ++c) dot += static_cast<double>(a[c]) * static_cast<double>(b[c]);
    total += dot / (norms[u] * norms[v]);
  }
  return total / static_cast<double>(graph.num_edges());
}

double task_metric(const DenseMatrix& logits, const CsrGraph& graph, NodeSplit split) {
  const IndexArray& rows = graph.nodes_in(split);
  if (graph.task() == TaskKind::MultiLabel) return micro_f1(logits, graph.labels().multi, rows);
  return accuracy(logits, graph.labels().classes, rows);
}

ALIGNAHEAD_NAMESPACE_END
