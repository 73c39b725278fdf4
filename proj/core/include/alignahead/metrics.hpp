#pragma once

#include <span>

#include "alignahead/dense_matrix.hpp"
#include "alignahead/graph.hpp"
#include "alignahead/sparse.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Fraction of `rows` whose argmax (lowest index on ties) equals the label.
/// Throws std::invalid_argument on an empty mask.
double accuracy(const DenseMatrix& logits, std::span<const int> labels, const IndexArray& rows);

/// 2TP / (2TP + FP + FN) over every (row, label) pair, predicting
/// sigmoid(logit) > threshold; 0 when the denominator is 0.
double micro_f1(const DenseMatrix& logits, const DenseMatrix& targets, const IndexArray& rows,
                double threshold = 0.5);

/// Mean cosine similarity of embeddings across the graph's directed edges.
/// A zero row has cosine 0 with everything. Returns 0 for an edgeless graph.
double smoothness(const DenseMatrix& embeddings, const CsrGraph& graph);

/// accuracy or micro_f1 depending on the graph's task.
double task_metric(const DenseMatrix& logits, const CsrGraph& graph, NodeSplit split);

ALIGNAHEAD_NAMESPACE_END
