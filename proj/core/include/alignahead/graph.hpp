#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "alignahead/dense_matrix.hpp"
#include "alignahead/precision.hpp"
#include "alignahead/sparse.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

enum class TaskKind { SingleLabel, MultiLabel };

enum class NodeSplit : std::uint8_t { None, Train, Val, Test };

const char* to_string(NodeSplit split);

struct NodeLabels {
  TaskKind task = TaskKind::SingleLabel;
  std::size_t num_classes = 0;
  std::vector<int> classes;  // single-label: one class id per node
  DenseMatrix multi;         // multi-label: N x C of 0/1

  static NodeLabels single(std::vector<int> classes, std::size_t num_classes);
  static NodeLabels multi_label(DenseMatrix targets);
};

using EdgePair = std::pair<std::size_t, std::size_t>;

/// Immutable undirected graph with node features, labels and a split.
///
/// Edges are stored once per direction in CSR order grouped by source node:
/// edge e runs from edge_sources()[e] to edge_targets()[e]. Because the edge
/// set is symmetric, the same segments also group edges by destination.
/// No self-loops are stored; attention_*() exposes a copy with one self-loop
/// per node appended in sorted position.
class CsrGraph {
 public:
  CsrGraph() = default;

  /// Symmetrizes and deduplicates `edges`; rejects self-loops and ids >= N.
  static CsrGraph build(std::size_t num_nodes, std::span<const EdgePair> edges,
                        DenseMatrix features, NodeLabels labels,
                        std::vector<NodeSplit> splits = {});

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_features() const noexcept { return features_.cols(); }
  std::size_t num_classes() const noexcept { return labels_.num_classes; }
  TaskKind task() const noexcept { return labels_.task; }
  /// Directed edge count (twice the undirected pair count).
  std::size_t num_edges() const noexcept { return edge_targets_.size(); }
  std::size_t num_undirected_edges() const noexcept { return num_edges() / 2; }

  const EdgeSegments& neighbor_segments() const noexcept { return segments_; }
  const EdgeSegments& incoming_segments() const noexcept { return segments_; }
  const IndexArray& edge_sources() const noexcept { return edge_sources_; }
  const IndexArray& edge_targets() const noexcept { return edge_targets_; }
  std::size_t degree(std::size_t v) const { return segments_.length(v); }
  std::size_t num_non_isolated() const noexcept { return num_non_isolated_; }

  const EdgeSegments& attention_segments() const noexcept { return attention_segments_; }
  const IndexArray& attention_sources() const noexcept { return attention_sources_; }
  const IndexArray& attention_targets() const noexcept { return attention_targets_; }

  /// D^-1/2 (A + I) D^-1/2, computed once at construction.
  const CsrMatrix& normalized_adjacency() const noexcept { return normalized_; }

  const DenseMatrix& features() const noexcept { return features_; }
  /// CSR copy of the features when they are sparse enough to be worth it.
  const std::optional<CsrMatrix>& sparse_features() const noexcept { return sparse_features_; }

  const NodeLabels& labels() const noexcept { return labels_; }
  const std::vector<NodeSplit>& splits() const noexcept { return splits_; }
  const IndexArray& nodes_in(NodeSplit split) const;

  /// Copy with a new split assignment.
  CsrGraph with_splits(std::vector<NodeSplit> splits) const;

  /// Undirected pairs (u < v) in CSR order.
  std::vector<EdgePair> undirected_edges() const;

  /// Throws DatasetError unless the train set is nonempty.
  void require_trainable() const;

 private:
  std::size_t num_nodes_ = 0;
  EdgeSegments segments_;
  IndexArray edge_sources_;
  IndexArray edge_targets_;
  EdgeSegments attention_segments_;
  IndexArray attention_sources_;
  IndexArray attention_targets_;
  CsrMatrix normalized_;
  std::size_t num_non_isolated_ = 0;
  DenseMatrix features_;
  std::optional<CsrMatrix> sparse_features_;
  NodeLabels labels_;
  std::vector<NodeSplit> splits_;
  IndexArray train_;
  IndexArray val_;
  IndexArray test_;
  IndexArray none_;
};

/// D^-1/2 (A + I) D^-1/2 with D the degree of A + I.
CsrMatrix normalize_adjacency(const CsrGraph& graph);

ALIGNAHEAD_NAMESPACE_END
