#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alignahead/autodiff.hpp"
#include "alignahead/graph.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

enum class LayerKind { Gcn, SageMean, SagePool, Gat, Mlp };
enum class Activation { None, Relu, Elu };

const char* to_string(LayerKind kind);
const char* to_string(Activation activation);
/// Accepts "gcn", "sage-mean", "sage-pool", "gat", "mlp"; throws ConfigError.
LayerKind parse_layer_kind(std::string_view name);
Activation parse_activation(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::Gcn;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;  // per head for GAT
  std::size_t heads = 1;
  bool concat_heads = false;
  Activation activation = Activation::None;

  std::size_t output_dim() const noexcept {
    return kind == LayerKind::Gat && concat_heads ? heads * out_dim : out_dim;
  }
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// A layer's input. Raw node features may come with a CSR copy, in which
/// case `dense` may be left undefined: every layer touches its input only
/// through project().
struct LayerInput {
  DiffValue dense;
  const CsrMatrix* sparse = nullptr;

  std::size_t cols() const { return sparse ? sparse->cols() : dense.cols(); }
};

/// x * w, through spmm when x has a sparse copy.
DiffValue project(const LayerInput& x, const DiffValue& w);
DiffValue apply_activation(Activation activation, const DiffValue& x);

/// act(adj * x * w + b)
DiffValue gcn_layer(const LayerInput& x, const CsrMatrix& adj, const DiffValue& w,
                    const DiffValue& b, Activation activation);

struct SageParams {
  DiffValue w_self;   // in x out
  DiffValue w_neigh;  // in x out (pool: pool_dim x out)
  DiffValue b;        // 1 x out
  DiffValue w_pool;   // pool only: in x pool_dim
  DiffValue b_pool;   // pool only: 1 x pool_dim
};

/// act([x_v, agg_v] * [w_self; w_neigh] + b), computed as two products.
/// agg is the neighbor mean of x (sage-mean) or the neighbor max of
/// relu(x w_pool + b_pool) (sage-pool); isolated nodes aggregate to zero.
DiffValue sage_layer(LayerKind kind, const LayerInput& x, const CsrGraph& graph,
                     const SageParams& params, Activation activation);

struct GatHead {
  DiffValue w;        // in x out
  DiffValue a_self;   // out x 1, scores the receiving node
  DiffValue a_neigh;  // out x 1, scores the sending node
};

/// Attention coefficients of one head over the self-loop augmented edge list
/// (E' x 1, grouped by receiving node). `wh` is x * head.w.
DiffValue gat_attention(const DiffValue& wh, const GatHead& head, const CsrGraph& graph);

/// Heads are concatenated or averaged, then bias and activation are applied.
DiffValue gat_layer(const LayerInput& x, const CsrGraph& graph, std::span<const GatHead> heads,
                    const DiffValue& bias, bool concat_heads, Activation activation);

/// Owns the parameters of one layer.
class GnnLayer {
 public:
  /// Glorot-uniform weights drawn from `rng`, zero biases. Throws ConfigError
  /// for zero dims or zero heads.
  GnnLayer(const LayerSpec& spec, std::mt19937_64& rng);
  /// From existing parameter values, in parameter_names() order.
  GnnLayer(const LayerSpec& spec, std::vector<DenseMatrix> values);

  const LayerSpec& spec() const noexcept { return spec_; }
  DiffValue forward(const LayerInput& x, const CsrGraph& graph) const;

  const std::vector<DiffValue>& parameters() const noexcept { return params_; }
  std::vector<std::string> parameter_names() const;
  /// Expected shapes, in parameter_names() order.
  std::vector<std::pair<std::size_t, std::size_t>> parameter_shapes() const {
    return shapes_for(spec_);
  }
  static std::vector<std::pair<std::size_t, std::size_t>> shapes_for(const LayerSpec& spec);

 private:
  static void validate(const LayerSpec& spec);

  LayerSpec spec_;
  std::vector<DiffValue> params_;
};

ALIGNAHEAD_NAMESPACE_END
