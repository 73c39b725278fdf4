#include "alignahead/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void read_real(const json& obj, const char* key, Real& out, const std::string& where) {
  double v = static_cast<double>(out);
  read(obj, key, v, where);
  out = static_cast<Real>(v);
}

void read_count(const json& obj, const char* key, std::size_t& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  out = v.get<std::size_t>();
}

ModelSpec parse_model(const json& j, const std::string& where) {
  check_keys(j, {"kind", "layers", "hidden", "heads", "output_heads"}, where);
  ModelSpec m;
  if (j.contains("kind")) m.kind = parse_layer_kind(j.at("kind").get<std::string>());
  read_count(j, "layers", m.layers, where);
  read_count(j, "hidden", m.hidden, where);
  read_count(j, "heads", m.heads, where);
  read_count(j, "output_heads", m.output_heads, where);
  if (m.layers == 0) throw ConfigError(where + ".layers must be at least 1");
  if (m.hidden == 0) throw ConfigError(where + ".hidden must be at least 1");
  if (m.heads == 0 || m.output_heads == 0) throw ConfigError(where + " heads must be at least 1");
  if (m.kind != LayerKind::Gat && (m.heads != 1 || m.output_heads != 1)) {
    throw ConfigError(where + ": only gat models take heads");
  }
  if (m.kind == LayerKind::Mlp) throw ConfigError(where + ": mlp is only an aux classifier kind");
  return m;
}

json model_to_json(const ModelSpec& m) {
  return {{"kind", to_string(m.kind)}, {"layers", m.layers},     {"hidden", m.hidden},
          {"heads", m.heads},          {"output_heads", m.output_heads}};
}

DatasetConfig parse_dataset(const json& j) {
  const std::string where = "dataset";
  check_keys(j, {"kind", "content", "cites", "path", "sbm", "split"}, where);
  DatasetConfig d;
  std::string kind = "sbm";
  read(j, "kind", kind, where);
  if (kind == "sbm") d.kind = DatasetKind::Sbm;
  else if (kind == "content_cites") d.kind = DatasetKind::ContentCites;
  else if (kind == "bundle") d.kind = DatasetKind::Bundle;
  else throw ConfigError("dataset.kind must be sbm, content_cites or bundle, got '" + kind + "'");
  read(j, "content", d.content, where);
  read(j, "cites", d.cites, where);
  read(j, "path", d.path, where);
  if (j.contains("sbm")) {
    const json& s = j.at("sbm");
    check_keys(s, {"blocks", "nodes_per_block", "p_in", "p_out", "feature_dim", "noise", "seed"},
               "dataset.sbm");
    read_count(s, "blocks", d.sbm.blocks, "dataset.sbm");
    read_count(s, "nodes_per_block", d.sbm.nodes_per_block, "dataset.sbm");
    read(s, "p_in", d.sbm.p_in, "dataset.sbm");
    read(s, "p_out", d.sbm.p_out, "dataset.sbm");
    read_count(s, "feature_dim", d.sbm.feature_dim, "dataset.sbm");
    read(s, "noise", d.sbm.noise, "dataset.sbm");
    read(s, "seed", d.sbm.seed, "dataset.sbm");
  }
  if (j.contains("split") && !j.at("split").is_null()) {
    const json& s = j.at("split");
    check_keys(s, {"per_class", "val", "test", "seed"}, "dataset.split");
    SplitConfig sp;
    read_count(s, "per_class", sp.per_class, "dataset.split");
    read_count(s, "val", sp.val, "dataset.split");
    read_count(s, "test", sp.test, "dataset.split");
    read(s, "seed", sp.seed, "dataset.split");
    d.split = sp;
  }
  switch (d.kind) {
    case DatasetKind::ContentCites:
      if (d.content.empty() || d.cites.empty()) {
        throw ConfigError("content_cites datasets need 'content' and 'cites' paths");
      }
      [[fallthrough]];
    case DatasetKind::Sbm:
      if (!d.split) throw ConfigError("dataset.split is required for " + kind + " datasets");
      break;
    case DatasetKind::Bundle:
      if (d.path.empty()) throw ConfigError("bundle datasets need a 'path'");
      break;
  }
  return d;
}

json dataset_to_json(const DatasetConfig& d) {
  json j = {{"kind", to_string(d.kind)}};
  if (d.kind == DatasetKind::ContentCites) {
    j["content"] = d.content;
    j["cites"] = d.cites;
  }
  if (d.kind == DatasetKind::Bundle) j["path"] = d.path;
  if (d.kind == DatasetKind::Sbm) {
    j["sbm"] = {{"blocks", d.sbm.blocks},           {"nodes_per_block", d.sbm.nodes_per_block},
                {"p_in", d.sbm.p_in},               {"p_out", d.sbm.p_out},
                {"feature_dim", d.sbm.feature_dim}, {"noise", d.sbm.noise},
                {"seed", d.sbm.seed}};
  }
  if (d.split) {
    j["split"] = {{"per_class", d.split->per_class}, {"val", d.split->val},
                  {"test", d.split->test},           {"seed", d.split->seed}};
  } else {
    j["split"] = nullptr;
  }
  return j;
}

RunConfig parse_json(const json& j) {
  check_keys(j, {"dataset", "model", "students", "num_students", "method", "train", "distill", "aux",
                 "seeds", "output", "precision"},
             "run config");
  RunConfig cfg;
  if (!j.contains("dataset")) throw ConfigError("run config needs a 'dataset'");
  cfg.dataset = parse_dataset(j.at("dataset"));

  std::string method = "alignahead++";
  read(j, "method", method, "run config");
  cfg.method = parse_method(method);

  if (j.contains("students")) {
    if (j.contains("model") || j.contains("num_students")) {
      throw ConfigError("give either 'students' or 'model'/'num_students', not both");
    }
    const json& list = j.at("students");
    if (!list.is_array() || list.empty()) throw ConfigError("'students' must be a nonempty array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      cfg.students.push_back(parse_model(list[k], "students[" + std::to_string(k) + "]"));
    }
  } else {
    const ModelSpec model = j.contains("model") ? parse_model(j.at("model"), "model") : ModelSpec{};
    std::size_t m = cfg.method == Method::Baseline ? 1 : 2;
    read_count(j, "num_students", m, "run config");
    if (m == 0) throw ConfigError("num_students must be at least 1");
    cfg.students.assign(m, model);
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, {"preset", "lr", "weight_decay", "epochs", "eval_every"}, "train");
    std::string preset = "citation";
    read(t, "preset", preset, "train");
    if (preset == "citation") cfg.train = TrainConfig::citation();
    else if (preset == "ppi") cfg.train = TrainConfig::ppi();
    else throw ConfigError("train.preset must be citation or ppi");
    read_real(t, "lr", cfg.train.lr, "train");
    read_real(t, "weight_decay", cfg.train.weight_decay, "train");
    read_count(t, "epochs", cfg.train.epochs, "train");
    read_count(t, "eval_every", cfg.train.eval_every, "train");
  }
  if (!(cfg.train.lr > 0)) throw ConfigError("train.lr must be positive");
  if (!(cfg.train.weight_decay >= 0)) throw ConfigError("train.weight_decay must be >= 0");
  if (cfg.train.epochs == 0) throw ConfigError("train.epochs must be at least 1");
  if (cfg.train.eval_every == 0) throw ConfigError("train.eval_every must be at least 1");

  if (j.contains("distill")) {
    DistillConfig& d = cfg.train.distill;
    const json& t = j.at("distill");
    check_keys(t, {"alpha", "beta", "lambda", "kernel", "matching", "feature_wrap"}, "distill");
    read_real(t, "alpha", d.alpha, "distill");
    read_real(t, "beta", d.beta, "distill");
    read_real(t, "lambda", d.lambda, "distill");
    read(t, "feature_wrap", d.feature_wrap, "distill");
    if (t.contains("matching")) d.matching = parse_matching(t.at("matching").get<std::string>());
    if (t.contains("kernel")) {
      const json& k = t.at("kernel");
      check_keys(k, {"kind", "sigma", "c", "d"}, "distill.kernel");
      if (k.contains("kind")) d.kernel.kind = parse_kernel_kind(k.at("kind").get<std::string>());
      read_real(k, "sigma", d.kernel.sigma, "distill.kernel");
      read_real(k, "c", d.kernel.c, "distill.kernel");
      read(k, "d", d.kernel.d, "distill.kernel");
    }
  }

  if (j.contains("aux")) {
    const json& a = j.at("aux");
    check_keys(a, {"kind", "depth"}, "aux");
    if (a.contains("kind")) cfg.aux.kind = parse_aux_kind(a.at("kind").get<std::string>());
    read_count(a, "depth", cfg.aux.depth, "aux");
  }

  if (j.contains("seeds")) {
    cfg.seeds.clear();
    const json& s = j.at("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("'seeds' must be a nonempty array");
    for (const auto& v : s) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("seeds must be non-negative integers");
      }
      cfg.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  read(j, "output", cfg.output, "run config");
  read(j, "precision", cfg.precision, "run config");
  return normalize_run_config(std::move(cfg));
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::Baseline: return "baseline";
    case Method::Oc: return "oc";
    case Method::Alignahead: return "alignahead";
    case Method::AlignaheadPlusPlus: return "alignahead++";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Baseline, Method::Oc, Method::Alignahead, Method::AlignaheadPlusPlus}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected baseline, oc, alignahead or alignahead++)");
}

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Sbm: return "sbm";
    case DatasetKind::ContentCites: return "content_cites";
    case DatasetKind::Bundle: return "bundle";
  }
  return "?";
}

RunConfig normalize_run_config(RunConfig cfg) {
  if (cfg.students.empty()) throw ConfigError("run config has no students");
  DistillConfig& d = cfg.train.distill;
  switch (cfg.method) {
    case Method::Baseline:
      cfg.students.resize(1);
      d.alpha = 0;
      d.beta = 0;
      break;
    case Method::Oc:
      d.matching = Matching::OneToOne;
      d.beta = 0;
      break;
    case Method::Alignahead:
      d.matching = Matching::Alignahead;
      d.beta = 0;
      break;
    case Method::AlignaheadPlusPlus: break;
  }
  if (cfg.method != Method::Baseline && cfg.students.size() < 2) {
    throw ConfigError(std::string(to_string(cfg.method)) + " needs at least two students");
  }
  for (const auto& s : cfg.students) {
    if (s.layers != cfg.students[0].layers) {
      throw ConfigError("all students must have the same number of layers");
    }
  }
  if (cfg.aux.depth == 0) throw ConfigError("aux.depth must be at least 1");
  if (cfg.precision != "f32" && cfg.precision != "f64") {
    throw ConfigError("precision must be f32 or f64, got '" + cfg.precision + "'");
  }
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  if (cfg.dataset.kind == DatasetKind::Sbm) {
    const SbmParams& p = cfg.dataset.sbm;
    if (!(p.p_out >= 0 && p.p_out < p.p_in && p.p_in <= 1)) {
      throw ConfigError("dataset.sbm needs 0 <= p_out < p_in <= 1");
    }
    if (p.blocks == 0 || p.nodes_per_block == 0) throw ConfigError("dataset.sbm is empty");
    if (p.feature_dim < p.blocks) throw ConfigError("dataset.sbm.feature_dim must be >= blocks");
    if (!(p.noise >= 0)) throw ConfigError("dataset.sbm.noise must be >= 0");
  }
  d.validate();
  return cfg;
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_run_config(buf.str());
  // Dataset paths are relative to the config file.
  const auto base = path.parent_path();
  for (std::string* p : {&cfg.dataset.content, &cfg.dataset.cites, &cfg.dataset.path}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg, int indent) {
  const DistillConfig& d = cfg.train.distill;
  json students = json::array();
  for (const auto& s : cfg.students) students.push_back(model_to_json(s));
  json j = {
      {"dataset", dataset_to_json(cfg.dataset)},
      {"students", students},
      {"method", to_string(cfg.method)},
      {"train",
       {{"lr", cfg.train.lr},
        {"weight_decay", cfg.train.weight_decay},
        {"epochs", cfg.train.epochs},
        {"eval_every", cfg.train.eval_every}}},
      {"distill",
       {{"alpha", d.alpha},
        {"beta", d.beta},
        {"lambda", d.lambda},
        {"matching", to_string(d.matching)},
        {"feature_wrap", d.feature_wrap},
        {"kernel",
         {{"kind", to_string(d.kernel.kind)}, {"sigma", d.kernel.sigma}, {"c", d.kernel.c}, {"d", d.kernel.d}}}}},
      {"aux", {{"kind", to_string(cfg.aux.kind)}, {"depth", cfg.aux.depth}}},
      {"seeds", cfg.seeds},
      {"output", cfg.output},
      {"precision", cfg.precision},
  };
  return j.dump(indent);
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return run_config_to_json(a, -1) == run_config_to_json(b, -1);
}

ALIGNAHEAD_NAMESPACE_END
