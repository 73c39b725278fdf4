#include "alignahead/losses.hpp"

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

DiffValue zero_scalar() { return constant(DenseMatrix(1, 1)); }

void require_peers_match(const ForwardTrace& self, std::span<const ForwardTrace> peers) {
  for (const auto& p : peers) {
    if (p.depth() != self.depth()) {
      throw ShapeError("student depths differ: " + std::to_string(self.depth()) + " vs " +
                       std::to_string(p.depth()));
    }
  }
}

bool has_all_logits(const ForwardTrace& t) {
  for (const auto& l : t.logits) {
    if (!l.defined()) return false;
  }
  return !t.logits.empty();
}

}  // namespace

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Euclidean: return "euclidean";
    case KernelKind::Linear: return "linear";
    case KernelKind::Poly: return "poly";
    case KernelKind::Rbf: return "rbf";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view name) {
  for (KernelKind k : {KernelKind::Euclidean, KernelKind::Linear, KernelKind::Poly, KernelKind::Rbf}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown kernel '" + std::string(name) +
                    "' (expected euclidean, linear, poly or rbf)");
}

void KernelConfig::validate() const {
  if (!(sigma > 0)) throw ConfigError("kernel sigma must be positive");
  if (d < 1) throw ConfigError("poly kernel degree must be at least 1");
}

const char* to_string(Matching matching) {
  return matching == Matching::Alignahead ? "alignahead" : "one-to-one";
}

Matching parse_matching(std::string_view name) {
  if (name == "alignahead") return Matching::Alignahead;
  if (name == "one-to-one") return Matching::OneToOne;
  throw ConfigError("unknown matching '" + std::string(name) + "' (expected alignahead or one-to-one)");
}

void DistillConfig::validate() const {
  if (!(alpha >= 0)) throw ConfigError("alpha must be >= 0");
  if (!(beta >= 0 && beta <= 1)) throw ConfigError("beta must lie in [0, 1]");
  if (!(lambda >= 0 && lambda <= 1)) throw ConfigError("lambda must lie in [0, 1]");
  kernel.validate();
}

DiffValue kernel_similarity(const DiffValue& z, const CsrGraph& graph, const KernelConfig& kernel) {
  if (z.rows() != graph.num_nodes()) {
    throw ShapeError("kernel_similarity: embedding has " + std::to_string(z.rows()) +
                     " rows for " + std::to_string(graph.num_nodes()) + " nodes");
  }
  const DiffValue zu = gather_rows(z, graph.edge_sources());
  const DiffValue zv = gather_rows(z, graph.edge_targets());
  switch (kernel.kind) {
    case KernelKind::Euclidean: return row_sum(square(sub(zu, zv)));
    case KernelKind::Linear: return row_sum(hadamard(zu, zv));
    case KernelKind::Poly: return power(add_scalar(row_sum(hadamard(zu, zv)), kernel.c), kernel.d);
    case KernelKind::Rbf:
      return exp(scale(row_sum(square(sub(zu, zv))), Real(-1) / (Real(2) * kernel.sigma)));
  }
  throw ConfigError("unknown kernel");
}

DiffValue local_structure(const DiffValue& z, const CsrGraph& graph, const KernelConfig& kernel) {
  return segment_softmax(kernel_similarity(z, graph, kernel), graph.neighbor_segments());
}

std::size_t align_target_index(std::size_t i, std::size_t depth, Matching matching) {
  if (depth == 0 || i >= depth) throw ShapeError("align_target_index: layer out of range");
  return matching == Matching::Alignahead ? (i + 1) % depth : i;
}

DiffValue structure_loss(const ForwardTrace& self, std::span<const ForwardTrace> peers,
                         const CsrGraph& graph, const DistillConfig& cfg) {
  require_peers_match(self, peers);
  if (peers.empty() || graph.num_edges() == 0) return zero_scalar();
  const std::size_t h = self.depth();
  const Real weight = Real(1) / (static_cast<Real>(peers.size()) *
                                 static_cast<Real>(graph.num_non_isolated()));
  std::vector<DiffValue> self_structures;
  for (const auto& f : self.activations) self_structures.push_back(local_structure(f, graph, cfg.kernel));
  std::vector<DiffValue> terms;
  for (const ForwardTrace& peer : peers) {
    std::vector<DiffValue> peer_structures(h);
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t t = align_target_index(i, h, cfg.matching);
      if (!peer_structures[t].defined()) {
        NoGradGuard no_grad;
        peer_structures[t] = local_structure(detach(peer.activations[t]), graph, cfg.kernel);
      }
      terms.push_back(kl_divergence(peer_structures[t], self_structures[i]));
    }
  }
  return scale(add_n(terms), weight);
}

DiffValue feature_loss(const ForwardTrace& self, std::span<const ForwardTrace> peers,
                       TaskKind task, const DistillConfig& cfg) {
  require_peers_match(self, peers);
  if (peers.empty()) return zero_scalar();
  if (!has_all_logits(self)) throw ConfigError("feature loss needs class logits for every layer");
  const std::size_t h = self.depth();
  const bool multi = task == TaskKind::MultiLabel;
  std::vector<DiffValue> learner(h);
  for (std::size_t i = 0; i < h; ++i) {
    learner[i] = multi ? sigmoid(self.logits[i]) : row_softmax(self.logits[i]);
  }
  std::vector<DiffValue> terms;
  for (const ForwardTrace& peer : peers) {
    if (!has_all_logits(peer)) throw ConfigError("feature loss needs class logits for every peer layer");
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t t = align_target_index(i, h, cfg.matching);
      if (!cfg.feature_wrap && cfg.matching == Matching::Alignahead && h > 1 && i + 1 == h) continue;
      DiffValue target;
      {
        NoGradGuard no_grad;
        const DiffValue z = detach(peer.logits[t]);
        target = multi ? sigmoid(z) : row_softmax(z);
      }
      terms.push_back(multi ? bernoulli_kl_divergence(target, learner[i])
                            : kl_divergence(target, learner[i]));
    }
  }
  if (terms.empty()) return zero_scalar();
  const DiffValue& ref = self.logits.back();
  const Real count = static_cast<Real>(multi ? ref.rows() * ref.cols() : ref.rows());
  return scale(add_n(terms), Real(1) / (static_cast<Real>(peers.size()) * count));
}

DiffValue classification_loss(const DiffValue& logits, const CsrGraph& graph, const IndexArray& rows) {
  const NodeLabels& labels = graph.labels();
  if (logits.cols() != graph.num_classes()) {
    throw ShapeError("logits have " + std::to_string(logits.cols()) + " classes, graph has " +
                     std::to_string(graph.num_classes()));
  }
  if (labels.task == TaskKind::MultiLabel) return sigmoid_cross_entropy(logits, labels.multi, rows);
  return softmax_cross_entropy(logits, labels.classes, rows);
}

DiffValue deep_supervision_loss(const ForwardTrace& trace, const CsrGraph& graph) {
  if (!has_all_logits(trace)) throw ConfigError("deep supervision needs class logits for every layer");
  std::vector<DiffValue> terms;
  for (const auto& l : trace.logits) {
    terms.push_back(classification_loss(l, graph, graph.nodes_in(NodeSplit::Train)));
  }
  return add_n(terms);
}

DiffValue label_loss(const ForwardTrace& trace, const CsrGraph& graph) {
  return classification_loss(trace.logits.back(), graph, graph.nodes_in(NodeSplit::Train));
}

Real combine_terms(Real ce, Real ds, Real fea, Real str, std::size_t depth, const DistillConfig& cfg) {
  const Real h = static_cast<Real>(depth);
  return (1 - cfg.beta) * ce + (cfg.beta / h) * (cfg.lambda * fea + (1 - cfg.lambda) * ds) +
         cfg.alpha * str;
}

LossBreakdown total_loss(const ForwardTrace& self, std::span<const ForwardTrace> peers,
                         const CsrGraph& graph, const DistillConfig& cfg) {
  graph.require_trainable();
  const std::size_t h = self.depth();
  const Real h_real = static_cast<Real>(h);
  const bool aux = has_all_logits(self);
  const Real w_ce = 1 - cfg.beta;
  const Real w_fea = cfg.beta / h_real * cfg.lambda;
  const Real w_ds = cfg.beta / h_real * (1 - cfg.lambda);
  const Real w_str = cfg.alpha;
  if (!aux && (w_fea != 0 || w_ds != 0)) {
    throw ConfigError("beta > 0 needs auxiliary classifiers on every intermediate layer");
  }

  LossBreakdown out;
  std::vector<DiffValue> parts;
  const DiffValue ce = label_loss(self, graph);
  out.ce = ce.item();
  if (w_ce != 0) parts.push_back(scale(ce, w_ce));
  if (aux) {
    const DiffValue ds = deep_supervision_loss(self, graph);
    out.ds = ds.item();
    if (w_ds != 0) parts.push_back(scale(ds, w_ds));
    if (!peers.empty()) {
      const DiffValue fea = feature_loss(self, peers, graph.task(), cfg);
      out.fea = fea.item();
      if (w_fea != 0) parts.push_back(scale(fea, w_fea));
    }
  }
  if (!peers.empty()) {
    const DiffValue str = structure_loss(self, peers, graph, cfg);
    out.str = str.item();
    if (w_str != 0) parts.push_back(scale(str, w_str));
  }
  out.total = parts.empty() ? zero_scalar() : add_n(parts);
  out.total_value = out.total.item();
  return out;
}

ALIGNAHEAD_NAMESPACE_END
