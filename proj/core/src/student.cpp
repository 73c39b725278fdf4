#include "alignahead/student.hpp"

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

std::vector<LayerSpec> backbone_specs(const ModelSpec& model, std::size_t in_dim,
                                      std::size_t num_classes) {
  if (model.layers == 0) throw ConfigError("model needs at least one layer");
  if (model.hidden == 0) throw ConfigError("hidden width must be positive");
  if (model.kind == LayerKind::Gat && (model.heads == 0 || model.output_heads == 0)) {
    throw ConfigError("gat needs at least one head per layer");
  }
  std::vector<LayerSpec> specs;
  std::size_t width = in_dim;
  for (std::size_t i = 0; i < model.layers; ++i) {
    LayerSpec s;
    s.kind = model.kind;
    s.in_dim = width;
    const bool last = i + 1 == model.layers;
    if (model.kind == LayerKind::Gat) {
      s.heads = last ? model.output_heads : model.heads;
      s.concat_heads = !last;
      s.activation = last ? Activation::None : Activation::Elu;
    } else {
      s.activation = last ? Activation::None : Activation::Relu;
    }
    s.out_dim = last ? num_classes : model.hidden;
    specs.push_back(s);
    width = s.output_dim();
  }
  return specs;
}

const char* to_string(AuxKind kind) { return kind == AuxKind::Gnn ? "gnn" : "mlp"; }

AuxKind parse_aux_kind(std::string_view name) {
  if (name == "gnn") return AuxKind::Gnn;
  if (name == "mlp") return AuxKind::Mlp;
  throw ConfigError("unknown aux kind '" + std::string(name) + "' (expected gnn or mlp)");
}

std::vector<LayerSpec> aux_specs(const AuxSpec& aux, LayerKind backbone, std::size_t width,
                                 std::size_t num_classes) {
  if (aux.depth == 0) throw ConfigError("aux classifier depth must be at least 1");
  const LayerKind kind = aux.kind == AuxKind::Mlp ? LayerKind::Mlp : backbone;
  const Activation hidden_act = kind == LayerKind::Gat ? Activation::Elu : Activation::Relu;
  std::vector<LayerSpec> specs;
  for (std::size_t j = 0; j < aux.depth; ++j) {
    const bool last = j + 1 == aux.depth;
    LayerSpec s;
    s.kind = kind;
    s.in_dim = width;
    s.out_dim = last ? num_classes : width;
    s.activation = last ? Activation::None : hidden_act;
    specs.push_back(s);
  }
  return specs;
}

StudentModel::StudentModel(std::vector<GnnLayer> layers, std::vector<std::vector<GnnLayer>> aux,
                           std::optional<AuxSpec> aux_spec)
    : layers_(std::move(layers)), aux_(std::move(aux)), aux_spec_(std::move(aux_spec)) {
  if (layers_.empty()) throw ConfigError("student has no layers");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].spec().in_dim != layers_[i - 1].spec().output_dim()) {
      throw ConfigError("layer " + std::to_string(i + 1) + " expects width " +
                        std::to_string(layers_[i].spec().in_dim) + " but layer " +
                        std::to_string(i) + " produces " +
                        std::to_string(layers_[i - 1].spec().output_dim()));
    }
  }
  if (!aux_.empty() && aux_.size() != layers_.size() - 1) {
    throw ConfigError("expected " + std::to_string(layers_.size() - 1) +
                      " aux classifiers, got " + std::to_string(aux_.size()));
  }
  for (std::size_t i = 0; i < aux_.size(); ++i) {
    const auto& head = aux_[i];
    if (head.empty() || head.front().spec().in_dim != layers_[i].spec().output_dim() ||
        head.back().spec().output_dim() != num_classes()) {
      throw ConfigError("aux classifier " + std::to_string(i + 1) + " does not fit its layer");
    }
  }
}

std::size_t StudentModel::num_classes() const { return layers_.back().spec().output_dim(); }
std::size_t StudentModel::input_dim() const { return layers_.front().spec().in_dim; }

std::vector<DiffValue> StudentModel::parameters() const {
  std::vector<DiffValue> out;
  for (const auto& layer : layers_) {
    out.insert(out.end(), layer.parameters().begin(), layer.parameters().end());
  }
  for (const auto& head : aux_) {
    for (const auto& layer : head) {
      out.insert(out.end(), layer.parameters().begin(), layer.parameters().end());
    }
  }
  return out;
}

std::vector<std::string> StudentModel::parameter_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (const auto& n : layers_[i].parameter_names()) out.push_back("layer" + std::to_string(i) + "." + n);
  }
  for (std::size_t i = 0; i < aux_.size(); ++i) {
    for (std::size_t j = 0; j < aux_[i].size(); ++j) {
      for (const auto& n : aux_[i][j].parameter_names()) {
        out.push_back("aux" + std::to_string(i) + "." + std::to_string(j) + "." + n);
      }
    }
  }
  return out;
}

std::size_t StudentModel::num_parameters() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value().size();
  return n;
}

namespace {

GnnLayer clone_layer(const GnnLayer& layer) {
  std::vector<DenseMatrix> values;
  for (const auto& p : layer.parameters()) values.push_back(p.value());
  return GnnLayer(layer.spec(), std::move(values));
}

}  // namespace

StudentModel StudentModel::clone() const {
  std::vector<GnnLayer> layers;
  for (const auto& l : layers_) layers.push_back(clone_layer(l));
  std::vector<std::vector<GnnLayer>> aux;
  for (const auto& head : aux_) {
    std::vector<GnnLayer> h;
    for (const auto& l : head) h.push_back(clone_layer(l));
    aux.push_back(std::move(h));
  }
  return StudentModel(std::move(layers), std::move(aux), aux_spec_);
}

StudentModel build_student(const std::vector<LayerSpec>& specs, const std::optional<AuxSpec>& aux,
                           std::uint64_t seed) {
  if (aux && aux->depth == 0) throw ConfigError("aux classifier depth must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<GnnLayer> layers;
  for (const auto& s : specs) layers.emplace_back(s, rng);
  std::vector<std::vector<GnnLayer>> heads;
  if (aux && specs.size() > 1) {
    const std::size_t classes = specs.back().output_dim();
    for (std::size_t i = 0; i + 1 < specs.size(); ++i) {
      std::vector<GnnLayer> head;
      for (const auto& s : aux_specs(*aux, specs[i].kind, specs[i].output_dim(), classes)) {
        head.emplace_back(s, rng);
      }
      heads.push_back(std::move(head));
    }
  }
  return StudentModel(std::move(layers), std::move(heads), aux);
}

LayerInput feature_input(const CsrGraph& graph) {
  if (graph.sparse_features()) return LayerInput{{}, &*graph.sparse_features()};
  return LayerInput{constant(graph.features()), nullptr};
}

ForwardTrace forward(const StudentModel& model, const CsrGraph& graph, bool with_aux) {
  if (graph.num_features() != model.input_dim()) {
    throw ShapeError("graph has " + std::to_string(graph.num_features()) +
                     " features, model expects " + std::to_string(model.input_dim()));
  }
  ForwardTrace trace;
  LayerInput x = feature_input(graph);
  for (const auto& layer : model.layers()) {
    DiffValue h = layer.forward(x, graph);
    trace.activations.push_back(h);
    x = LayerInput{h, nullptr};
  }
  const bool run_aux = with_aux && model.has_aux();
  for (std::size_t i = 0; i + 1 < model.depth(); ++i) {
    if (!run_aux) {
      trace.logits.emplace_back();
      continue;
    }
    LayerInput a{trace.activations[i], nullptr};
    for (const auto& layer : model.aux()[i]) a = LayerInput{layer.forward(a, graph), nullptr};
    trace.logits.push_back(a.dense);
  }
  trace.logits.push_back(trace.activations.back());
  return trace;
}

ALIGNAHEAD_NAMESPACE_END
