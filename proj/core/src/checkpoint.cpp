#include "alignahead/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'A', 'L', 'N', 'H', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoints assume little-endian hosts");

json spec_to_json(const LayerSpec& s) {
  return {{"kind", to_string(s.kind)},     {"in_dim", s.in_dim},
          {"out_dim", s.out_dim},          {"heads", s.heads},
          {"concat_heads", s.concat_heads}, {"activation", to_string(s.activation)}};
}

LayerSpec spec_from_json(const json& j) {
  LayerSpec s;
  s.kind = parse_layer_kind(j.at("kind").get<std::string>());
  s.in_dim = j.at("in_dim").get<std::size_t>();
  s.out_dim = j.at("out_dim").get<std::size_t>();
  s.heads = j.at("heads").get<std::size_t>();
  s.concat_heads = j.at("concat_heads").get<bool>();
  s.activation = parse_activation(j.at("activation").get<std::string>());
  return s;
}

void append_layer(json& specs, json& tensors, const GnnLayer& layer, const std::string& prefix,
                  std::size_t& offset) {
  specs.push_back(spec_to_json(layer.spec()));
  const auto names = layer.parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const DenseMatrix& v = layer.parameters()[i].value();
    tensors.push_back({{"name", prefix + names[i]}, {"rows", v.rows()}, {"cols", v.cols()},
                       {"offset", offset}});
    offset += v.size();
  }
}

}  // namespace

void save_checkpoint(const StudentModel& model, const std::filesystem::path& path) {
  json header;
  header["precision"] = kPrecisionName;
  json layers = json::array(), tensors = json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < model.depth(); ++i) {
    append_layer(layers, tensors, model.layers()[i], "layer" + std::to_string(i) + ".", offset);
  }
  header["layers"] = layers;
  if (model.aux_spec()) {
    header["aux"] = {{"kind", to_string(model.aux_spec()->kind)}, {"depth", model.aux_spec()->depth}};
  } else {
    header["aux"] = nullptr;
  }
  json aux = json::array();
  for (std::size_t i = 0; i < model.aux().size(); ++i) {
    json head = json::array();
    for (std::size_t j = 0; j < model.aux()[i].size(); ++j) {
      append_layer(head, tensors, model.aux()[i][j],
                   "aux" + std::to_string(i) + "." + std::to_string(j) + ".", offset);
    }
    aux.push_back(head);
  }
  header["aux_layers"] = aux;
  header["tensors"] = tensors;

  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const DiffValue& p : model.parameters()) {
    const DenseMatrix& v = p.value();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(Real)));
  }
  if (!out) throw DatasetError("write failed for " + path.string());
}

StudentModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  char magic[8];
  std::uint64_t length = 0;
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DatasetError(path.string() + ": not a checkpoint file");
  }
  if (!in.read(reinterpret_cast<char*>(&length), sizeof(length)) || length > (1u << 30)) {
    throw DatasetError(path.string() + ": bad header length");
  }
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw DatasetError(path.string() + ": truncated header");
  }
  try {
    const json header = json::parse(text);
    const std::string precision = header.at("precision").get<std::string>();
    if (precision != kPrecisionName) {
      throw DatasetError(path.string() + ": checkpoint stores " + precision +
                         " parameters, this build uses " + kPrecisionName);
    }
    const json& tensors = header.at("tensors");
    std::size_t next_tensor = 0;
    const auto load_layer = [&](const json& spec_json) {
      const LayerSpec spec = spec_from_json(spec_json);
      const auto shapes = GnnLayer::shapes_for(spec);
      std::vector<DenseMatrix> values;
      for (const auto& [r, c] : shapes) {
        if (next_tensor >= tensors.size()) throw DatasetError(path.string() + ": missing tensors");
        const json& t = tensors.at(next_tensor++);
        if (t.at("rows").get<std::size_t>() != r || t.at("cols").get<std::size_t>() != c) {
          throw DatasetError(path.string() + ": tensor " + t.at("name").get<std::string>() +
                             " does not match its layer spec");
        }
        std::vector<Real> data(r * c);
        if (!in.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(data.size() * sizeof(Real)))) {
          throw DatasetError(path.string() + ": truncated tensor data");
        }
        values.emplace_back(r, c, std::move(data));
      }
      return GnnLayer(spec, std::move(values));
    };

    std::vector<GnnLayer> layers;
    for (const json& s : header.at("layers")) layers.push_back(load_layer(s));
    std::optional<AuxSpec> aux_spec;
    if (!header.at("aux").is_null()) {
      aux_spec = AuxSpec{parse_aux_kind(header["aux"].at("kind").get<std::string>()),
                         header["aux"].at("depth").get<std::size_t>()};
    }
    std::vector<std::vector<GnnLayer>> aux;
    for (const json& head : header.at("aux_layers")) {
      std::vector<GnnLayer> h;
      for (const json& s : head) h.push_back(load_layer(s));
      aux.push_back(std::move(h));
    }
    if (next_tensor != tensors.size()) throw DatasetError(path.string() + ": unused tensors");
    return StudentModel(std::move(layers), std::move(aux), aux_spec);
  } catch (const json::exception& e) {
    throw DatasetError(path.string() + ": bad header: " + e.what());
  } catch (const ConfigError& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
}

ALIGNAHEAD_NAMESPACE_END
