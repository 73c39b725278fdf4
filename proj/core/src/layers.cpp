#include "alignahead/layers.hpp"

#include <cmath>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

DenseMatrix glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  DenseMatrix m(rows, cols);
  // 53 random bits mapped to [-limit, limit); avoids distribution
  // implementation differences between standard libraries.
  for (Real& v : m.values()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = static_cast<Real>((2.0 * u - 1.0) * limit);
  }
  return m;
}

void require_cols(const char* op, std::size_t got, std::size_t want) {
  if (got != want) {
    throw ShapeError(std::string(op) + ": input has " + std::to_string(got) +
                     " columns, layer expects " + std::to_string(want));
  }
}

}  // namespace

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Gcn: return "gcn";
    case LayerKind::SageMean: return "sage-mean";
    case LayerKind::SagePool: return "sage-pool";
    case LayerKind::Gat: return "gat";
    case LayerKind::Mlp: return "mlp";
  }
  return "?";
}

const char* to_string(Activation activation) {
  switch (activation) {
    case Activation::None: return "none";
    case Activation::Relu: return "relu";
    case Activation::Elu: return "elu";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (LayerKind k : {LayerKind::Gcn, LayerKind::SageMean, LayerKind::SagePool, LayerKind::Gat,
                      LayerKind::Mlp}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown layer kind '" + std::string(name) +
                    "' (expected gcn, sage-mean, sage-pool, gat or mlp)");
}

Activation parse_activation(std::string_view name) {
  for (Activation a : {Activation::None, Activation::Relu, Activation::Elu}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

DiffValue project(const LayerInput& x, const DiffValue& w) {
  if (x.sparse) {
    require_cols("project", x.sparse->cols(), w.rows());
    return spmm(*x.sparse, w);
  }
  return matmul(x.dense, w);
}

DiffValue apply_activation(Activation activation, const DiffValue& x) {
  switch (activation) {
    case Activation::Relu: return relu(x);
    case Activation::Elu: return elu(x);
    case Activation::None: break;
  }
  return x;
}

DiffValue gcn_layer(const LayerInput& x, const CsrMatrix& adj, const DiffValue& w,
                    const DiffValue& b, Activation activation) {
  return apply_activation(activation, add_row_vector(spmm(adj, project(x, w)), b));
}

DiffValue sage_layer(LayerKind kind, const LayerInput& x, const CsrGraph& graph,
                     const SageParams& params, Activation activation) {
  const EdgeSegments& segments = graph.neighbor_segments();
  const IndexArray& neighbors = graph.edge_targets();
  DiffValue neigh;
  if (kind == LayerKind::SageMean) {
    // mean(x_u) W = mean(x_u W); projecting first keeps the gathered block narrow.
    neigh = segment_reduce(SegmentReduce::Mean, gather_rows(project(x, params.w_neigh), neighbors),
                           segments);
  } else if (kind == LayerKind::SagePool) {
    const DiffValue pooled = relu(add_row_vector(project(x, params.w_pool), params.b_pool));
    const DiffValue agg = segment_reduce(SegmentReduce::Max, gather_rows(pooled, neighbors), segments);
    neigh = matmul(agg, params.w_neigh);
  } else {
    throw ShapeError(std::string("sage_layer: unsupported kind ") + to_string(kind));
  }
  return apply_activation(activation,
                          add_row_vector(add(project(x, params.w_self), neigh), params.b));
}

DiffValue gat_attention(const DiffValue& wh, const GatHead& head, const CsrGraph& graph) {
  const DiffValue s_self = matmul(wh, head.a_self);
  const DiffValue s_neigh = matmul(wh, head.a_neigh);
  const DiffValue scores = leaky_relu(add(gather_rows(s_self, graph.attention_sources()),
                                          gather_rows(s_neigh, graph.attention_targets())));
  return segment_softmax(scores, graph.attention_segments());
}

DiffValue gat_layer(const LayerInput& x, const CsrGraph& graph, std::span<const GatHead> heads,
                    const DiffValue& bias, bool concat_heads, Activation activation) {
  if (heads.empty()) throw ShapeError("gat_layer: no heads");
  std::vector<DiffValue> outs;
  outs.reserve(heads.size());
  for (const GatHead& head : heads) {
    const DiffValue wh = project(x, head.w);
    const DiffValue alpha = gat_attention(wh, head, graph);
    const DiffValue messages = scale_rows(gather_rows(wh, graph.attention_targets()), alpha);
    outs.push_back(segment_reduce(SegmentReduce::Sum, messages, graph.attention_segments()));
  }
  DiffValue combined;
  if (outs.size() == 1) {
    combined = outs.front();
  } else if (concat_heads) {
    combined = concat_cols(outs);
  } else {
    combined = scale(add_n(outs), Real(1) / static_cast<Real>(outs.size()));
  }
  return apply_activation(activation, add_row_vector(combined, bias));
}

void GnnLayer::validate(const LayerSpec& spec) {
  if (spec.in_dim == 0 || spec.out_dim == 0) {
    throw ConfigError(std::string(to_string(spec.kind)) + " layer with zero dimension");
  }
  if (spec.heads == 0) throw ConfigError("gat layer needs at least one head");
  if (spec.kind != LayerKind::Gat && spec.heads != 1) {
    throw ConfigError(std::string(to_string(spec.kind)) + " layer cannot have multiple heads");
  }
}

std::vector<std::string> GnnLayer::parameter_names() const {
  switch (spec_.kind) {
    case LayerKind::Gcn:
    case LayerKind::Mlp: return {"w", "b"};
    case LayerKind::SageMean: return {"w_self", "w_neigh", "b"};
    case LayerKind::SagePool: return {"w_pool", "b_pool", "w_self", "w_neigh", "b"};
    case LayerKind::Gat: {
      std::vector<std::string> names;
      for (std::size_t h = 0; h < spec_.heads; ++h) {
        const std::string p = "head" + std::to_string(h) + ".";
        names.push_back(p + "w");
        names.push_back(p + "a_self");
        names.push_back(p + "a_neigh");
      }
      names.push_back("b");
      return names;
    }
  }
  return {};
}

std::vector<std::pair<std::size_t, std::size_t>> GnnLayer::shapes_for(const LayerSpec& spec) {
  const std::size_t in = spec.in_dim, out = spec.out_dim;
  switch (spec.kind) {
    case LayerKind::Gcn:
    case LayerKind::Mlp: return {{in, out}, {1, out}};
    case LayerKind::SageMean: return {{in, out}, {in, out}, {1, out}};
    case LayerKind::SagePool: return {{in, in}, {1, in}, {in, out}, {in, out}, {1, out}};
    case LayerKind::Gat: {
      std::vector<std::pair<std::size_t, std::size_t>> shapes;
      for (std::size_t h = 0; h < spec.heads; ++h) {
        shapes.insert(shapes.end(), {{in, out}, {out, 1}, {out, 1}});
      }
      shapes.emplace_back(1, spec.output_dim());
      return shapes;
    }
  }
  return {};
}

GnnLayer::GnnLayer(const LayerSpec& spec, std::mt19937_64& rng) : spec_(spec) {
  validate(spec_);
  for (const auto& [r, c] : parameter_shapes()) {
    params_.push_back(parameter(r == 1 ? DenseMatrix(r, c) : glorot(r, c, rng)));
  }
}

GnnLayer::GnnLayer(const LayerSpec& spec, std::vector<DenseMatrix> values) : spec_(spec) {
  validate(spec_);
  const auto shapes = parameter_shapes();
  if (values.size() != shapes.size()) {
    throw ShapeError(std::string(to_string(spec.kind)) + " layer expects " +
                     std::to_string(shapes.size()) + " parameters, got " +
                     std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (values[i].rows() != shapes[i].first || values[i].cols() != shapes[i].second) {
      throw ShapeError("parameter " + parameter_names()[i] + " has shape " +
                       values[i].shape_string());
    }
    params_.push_back(parameter(std::move(values[i])));
  }
}

DiffValue GnnLayer::forward(const LayerInput& x, const CsrGraph& graph) const {
  require_cols(to_string(spec_.kind), x.cols(), spec_.in_dim);
  const auto& p = params_;
  switch (spec_.kind) {
    case LayerKind::Gcn:
      return gcn_layer(x, graph.normalized_adjacency(), p[0], p[1], spec_.activation);
    case LayerKind::Mlp:
      return apply_activation(spec_.activation, add_row_vector(project(x, p[0]), p[1]));
    case LayerKind::SageMean:
      return sage_layer(spec_.kind, x, graph, SageParams{p[0], p[1], p[2], {}, {}},
                        spec_.activation);
    case LayerKind::SagePool:
      return sage_layer(spec_.kind, x, graph, SageParams{p[2], p[3], p[4], p[0], p[1]},
                        spec_.activation);
    case LayerKind::Gat: {
      std::vector<GatHead> heads;
      for (std::size_t h = 0; h < spec_.heads; ++h) {
        heads.push_back(GatHead{p[3 * h], p[3 * h + 1], p[3 * h + 2]});
      }
      return gat_layer(x, graph, heads, p.back(), spec_.concat_heads, spec_.activation);
    }
  }
  throw ShapeError("unknown layer kind");
}

ALIGNAHEAD_NAMESPACE_END
