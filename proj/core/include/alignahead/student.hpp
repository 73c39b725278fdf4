#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alignahead/layers.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Architecture shorthand used by configs.
struct ModelSpec {
  LayerKind kind = LayerKind::Gcn;
  std::size_t layers = 2;
  std::size_t hidden = 16;       // per head for GAT
  std::size_t heads = 1;         // hidden GAT layers
  std::size_t output_heads = 1;  // final GAT layer (averaged)

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// H layer specs: hidden layers use relu (elu and concatenated heads for
/// GAT), the last maps to num_classes with no activation.
std::vector<LayerSpec> backbone_specs(const ModelSpec& model, std::size_t in_dim,
                                      std::size_t num_classes);

enum class AuxKind { Gnn, Mlp };
const char* to_string(AuxKind kind);
AuxKind parse_aux_kind(std::string_view name);

struct AuxSpec {
  AuxKind kind = AuxKind::Gnn;
  std::size_t depth = 1;

  friend bool operator==(const AuxSpec&, const AuxSpec&) = default;
};

/// Layer specs of the auxiliary classifier reading a `width`-wide
/// activation of a backbone layer of kind `backbone`.
std::vector<LayerSpec> aux_specs(const AuxSpec& aux, LayerKind backbone, std::size_t width,
                                 std::size_t num_classes);

/// Backbone of H layers plus, optionally, one auxiliary classifier for each
/// of the first H-1 layers. Copies share parameter storage; use clone() for
/// an independent model.
class StudentModel {
 public:
  StudentModel() = default;
  StudentModel(std::vector<GnnLayer> layers, std::vector<std::vector<GnnLayer>> aux,
               std::optional<AuxSpec> aux_spec);

  std::size_t depth() const noexcept { return layers_.size(); }
  std::size_t num_classes() const;
  std::size_t input_dim() const;
  const std::vector<GnnLayer>& layers() const noexcept { return layers_; }
  /// aux()[i] classifies the output of layers()[i]; empty without aux.
  const std::vector<std::vector<GnnLayer>>& aux() const noexcept { return aux_; }
  const std::optional<AuxSpec>& aux_spec() const noexcept { return aux_spec_; }
  bool has_aux() const noexcept { return !aux_.empty(); }

  /// Every trainable parameter: backbone first, then aux classifiers.
  std::vector<DiffValue> parameters() const;
  /// "layer<i>.<name>" and "aux<i>.<j>.<name>", aligned with parameters().
  std::vector<std::string> parameter_names() const;
  std::size_t num_parameters() const;

  /// Deep copy with fresh parameter leaves holding the same values.
  StudentModel clone() const;

 private:
  std::vector<GnnLayer> layers_;
  std::vector<std::vector<GnnLayer>> aux_;
  std::optional<AuxSpec> aux_spec_;
};

/// Glorot-uniform initialization from `seed`; throws ConfigError when
/// consecutive dims do not chain or aux depth is zero.
StudentModel build_student(const std::vector<LayerSpec>& specs, const std::optional<AuxSpec>& aux,
                           std::uint64_t seed);

struct ForwardTrace {
  std::vector<DiffValue> activations;  // f_1..f_H, f_H = final logits
  /// Class logits per layer: aux output for i < H, f_H for the last. Entries
  /// for i < H are undefined when aux classifiers were not evaluated.
  std::vector<DiffValue> logits;

  std::size_t depth() const noexcept { return activations.size(); }
  const DiffValue& output() const { return activations.back(); }
};

/// Forward pass on the whole graph. Aux classifiers run only when
/// `with_aux` is set and the model has them.
ForwardTrace forward(const StudentModel& model, const CsrGraph& graph, bool with_aux = true);

/// Input for the first layer: the sparse feature copy when the graph has one.
LayerInput feature_input(const CsrGraph& graph);

ALIGNAHEAD_NAMESPACE_END
