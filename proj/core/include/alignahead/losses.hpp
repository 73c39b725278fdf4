#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "alignahead/autodiff.hpp"
#include "alignahead/graph.hpp"
#include "alignahead/student.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

enum class KernelKind { Euclidean, Linear, Poly, Rbf };
const char* to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

struct KernelConfig {
  KernelKind kind = KernelKind::Rbf;
  Real sigma = Real(100);  // rbf
  Real c = Real(0);        // poly offset
  int d = 2;               // poly degree

  /// Throws ConfigError for sigma <= 0 or d < 1.
  void validate() const;
  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

enum class Matching { Alignahead, OneToOne };
const char* to_string(Matching matching);
Matching parse_matching(std::string_view name);

struct DistillConfig {
  Real alpha = Real(1);
  Real beta = Real(0.4);
  Real lambda = Real(0.2);
  KernelConfig kernel;
  Matching matching = Matching::Alignahead;
  /// Include the pair (layer H, peer layer 1) in the feature loss.
  bool feature_wrap = true;

  /// Throws ConfigError when alpha < 0 or beta, lambda fall outside [0, 1].
  void validate() const;
  friend bool operator==(const DistillConfig&, const DistillConfig&) = default;
};

/// Per-edge kernel value D(z_u, z_v) over graph.edge_sources/targets (E x 1):
/// euclidean |z_u - z_v|^2, linear z_u.z_v, poly (z_u.z_v + c)^d,
/// rbf exp(-|z_u - z_v|^2 / (2 sigma)).
DiffValue kernel_similarity(const DiffValue& z, const CsrGraph& graph, const KernelConfig& kernel);

/// Softmax of kernel_similarity within each node's neighbor segment.
DiffValue local_structure(const DiffValue& z, const CsrGraph& graph, const KernelConfig& kernel);

/// 0-based peer layer matched to layer i of a depth-H student:
/// (i + 1) mod H for alignahead, i for one-to-one.
std::size_t align_target_index(std::size_t i, std::size_t depth, Matching matching);

/// sum_i (1/(M-1)) sum_peers (1/N') sum_j KL(peer structure at target(i), self
/// structure at i), N' = non-isolated nodes. Peer traces are detached.
/// Zero when there are no peers or no edges.
DiffValue structure_loss(const ForwardTrace& self, std::span<const ForwardTrace> peers,
                         const CsrGraph& graph, const DistillConfig& cfg);

/// Same layer pairing over class distributions: row-softmax KL averaged over
/// N for single-label tasks, Bernoulli KL averaged over N x C for multi-label.
/// Requires every layer's logits.
DiffValue feature_loss(const ForwardTrace& self, std::span<const ForwardTrace> peers,
                       TaskKind task, const DistillConfig& cfg);

/// Mean cross-entropy of `logits` over the training nodes.
DiffValue classification_loss(const DiffValue& logits, const CsrGraph& graph, const IndexArray& rows);

/// Sum over layers of the training cross-entropy; requires every layer's logits.
DiffValue deep_supervision_loss(const ForwardTrace& trace, const CsrGraph& graph);
/// Training cross-entropy of the last layer.
DiffValue label_loss(const ForwardTrace& trace, const CsrGraph& graph);

struct LossBreakdown {
  DiffValue total;
  Real ce = 0;
  Real ds = 0;
  Real fea = 0;
  Real str = 0;
  Real total_value = 0;
};

/// (1 - beta) ce + (beta / H) (lambda fea + (1 - lambda) ds) + alpha str.
/// Terms whose inputs are missing (no peers, no aux logits) are reported as
/// zero; a missing term with nonzero weight other than the peer terms
/// throws ConfigError.
LossBreakdown total_loss(const ForwardTrace& self, std::span<const ForwardTrace> peers,
                         const CsrGraph& graph, const DistillConfig& cfg);

/// Recombines raw term values with the loss weights.
Real combine_terms(Real ce, Real ds, Real fea, Real str, std::size_t depth, const DistillConfig& cfg);

ALIGNAHEAD_NAMESPACE_END
