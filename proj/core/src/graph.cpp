#include "alignahead/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

// Features below this density get a CSR copy for first-layer projections.
constexpr double kSparseFeatureDensity = 0.25;

}  // namespace

const char* to_string(NodeSplit split) {
  switch (split) {
    case NodeSplit::Train: return "train";
    case NodeSplit::Val: return "val";
    case NodeSplit::Test: return "test";
    case NodeSplit::None: break;
  }
  return "none";
}

NodeLabels NodeLabels::single(std::vector<int> classes, std::size_t num_classes) {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] < 0 || static_cast<std::size_t>(classes[i]) >= num_classes) {
      throw DatasetError("label " + std::to_string(classes[i]) + " at node " + std::to_string(i) +
                         " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  NodeLabels out;
  out.task = TaskKind::SingleLabel;
  out.num_classes = num_classes;
  out.classes = std::move(classes);
  return out;
}

NodeLabels NodeLabels::multi_label(DenseMatrix targets) {
  for (Real v : targets.values()) {
    if (v != Real(0) && v != Real(1)) throw DatasetError("multi-label targets must be 0 or 1");
  }
  NodeLabels out;
  out.task = TaskKind::MultiLabel;
  out.num_classes = targets.cols();
  out.multi = std::move(targets);
  return out;
}

CsrGraph CsrGraph::build(std::size_t num_nodes, std::span<const EdgePair> edges,
                         DenseMatrix features, NodeLabels labels,
                         std::vector<NodeSplit> splits) {
  if (features.rows() != num_nodes) {
    throw DatasetError("feature matrix has " + std::to_string(features.rows()) + " rows for " +
                       std::to_string(num_nodes) + " nodes");
  }
  const std::size_t label_rows =
      labels.task == TaskKind::SingleLabel ? labels.classes.size() : labels.multi.rows();
  if (label_rows != num_nodes) {
    throw DatasetError("labels cover " + std::to_string(label_rows) + " of " +
                       std::to_string(num_nodes) + " nodes");
  }
  if (splits.empty()) splits.assign(num_nodes, NodeSplit::None);
  if (splits.size() != num_nodes) throw DatasetError("split assignment has wrong length");

  std::vector<EdgePair> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw DatasetError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") references a node outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (u == v) throw DatasetError("self-loop at node " + std::to_string(u));
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  CsrGraph g;
  g.num_nodes_ = num_nodes;

  std::vector<std::size_t> offsets(num_nodes + 1, 0);
  std::vector<std::size_t> sources(directed.size());
  std::vector<std::size_t> targets(directed.size());
  for (std::size_t e = 0; e < directed.size(); ++e) {
    ++offsets[directed[e].first + 1];
    sources[e] = directed[e].first;
    targets[e] = directed[e].second;
  }
  for (std::size_t v = 0; v < num_nodes; ++v) offsets[v + 1] += offsets[v];
  g.num_non_isolated_ = 0;
  for (std::size_t v = 0; v < num_nodes; ++v) g.num_non_isolated_ += offsets[v + 1] > offsets[v];

  // Self-loop augmented copy for attention.
  std::vector<std::size_t> att_offsets(num_nodes + 1, 0);
  std::vector<std::size_t> att_sources;
  std::vector<std::size_t> att_targets;
  att_sources.reserve(directed.size() + num_nodes);
  att_targets.reserve(directed.size() + num_nodes);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    bool placed = false;
    for (std::size_t e = offsets[v]; e < offsets[v + 1]; ++e) {
      if (!placed && targets[e] > v) {
        att_sources.push_back(v);
        att_targets.push_back(v);
        placed = true;
      }
      att_sources.push_back(v);
      att_targets.push_back(targets[e]);
    }
    if (!placed) {
      att_sources.push_back(v);
      att_targets.push_back(v);
    }
    att_offsets[v + 1] = att_sources.size();
  }

  g.segments_ = EdgeSegments(IndexArray(std::move(offsets)));
  g.edge_sources_ = IndexArray(std::move(sources));
  g.edge_targets_ = IndexArray(std::move(targets));
  g.attention_segments_ = EdgeSegments(IndexArray(std::move(att_offsets)));
  g.attention_sources_ = IndexArray(std::move(att_sources));
  g.attention_targets_ = IndexArray(std::move(att_targets));

  std::size_t nonzeros = 0;
  for (Real v : features.values()) nonzeros += v != Real(0);
  if (!features.empty() &&
      static_cast<double>(nonzeros) < kSparseFeatureDensity * static_cast<double>(features.size())) {
    g.sparse_features_ = CsrMatrix::from_dense(features);
  }
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  g.normalized_ = normalize_adjacency(g);
  return g.with_splits(std::move(splits));
}

CsrGraph CsrGraph::with_splits(std::vector<NodeSplit> splits) const {
  if (splits.size() != num_nodes_) throw DatasetError("split assignment has wrong length");
  CsrGraph g = *this;
  std::vector<std::size_t> train, val, test, none;
  for (std::size_t v = 0; v < num_nodes_; ++v) {
    switch (splits[v]) {
      case NodeSplit::Train: train.push_back(v); break;
      case NodeSplit::Val: val.push_back(v); break;
      case NodeSplit::Test: test.push_back(v); break;
      case NodeSplit::None: none.push_back(v); break;
    }
  }
  g.splits_ = std::move(splits);
  g.train_ = IndexArray(std::move(train));
  g.val_ = IndexArray(std::move(val));
  g.test_ = IndexArray(std::move(test));
  g.none_ = IndexArray(std::move(none));
  return g;
}

const IndexArray& CsrGraph::nodes_in(NodeSplit split) const {
  switch (split) {
    case NodeSplit::Train: return train_;
    case NodeSplit::Val: return val_;
    case NodeSplit::Test: return test_;
    case NodeSplit::None: break;
  }
  return none_;
}

std::vector<EdgePair> CsrGraph::undirected_edges() const {
  std::vector<EdgePair> out;
  out.reserve(num_undirected_edges());
  for (std::size_t e = 0; e < num_edges(); ++e) {
    if (edge_sources_[e] < edge_targets_[e]) out.emplace_back(edge_sources_[e], edge_targets_[e]);
  }
  return out;
}

void CsrGraph::require_trainable() const {
  if (train_.empty()) throw DatasetError("graph has no training nodes");
}

CsrMatrix normalize_adjacency(const CsrGraph& graph) {
  const std::size_t n = graph.num_nodes();
  const EdgeSegments& att = graph.attention_segments();
  const IndexArray& cols = graph.attention_targets();
  std::vector<Real> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) {
    inv_sqrt[v] = Real(1) / std::sqrt(static_cast<Real>(att.length(v)));
  }
  std::vector<Real> values(cols.size());
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t e = att.begin(v); e < att.end(v); ++e) {
      values[e] = inv_sqrt[v] * inv_sqrt[cols[e]];
    }
  }
  return CsrMatrix(n, n, att.offsets(), cols, std::move(values));
}

ALIGNAHEAD_NAMESPACE_END
