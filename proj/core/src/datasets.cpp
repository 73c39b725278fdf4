#include "alignahead/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

namespace fs = std::filesystem;

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string());
  return in;
}

std::vector<std::string_view> split_tokens(std::string_view line, std::string_view delims) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const std::size_t b = line.find_first_not_of(delims, i);
    if (b == std::string_view::npos) break;
    std::size_t e = line.find_first_of(delims, b);
    if (e == std::string_view::npos) e = line.size();
    out.push_back(line.substr(b, e - b));
    i = e;
  }
  return out;
}

// Splits on every delimiter, keeping empty fields (CSV semantics).
std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  while (true) {
    const std::size_t e = line.find(delim, b);
    out.push_back(line.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
    if (e == std::string_view::npos) break;
    b = e + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string where(const fs::path& file, std::size_t line) {
  return file.filename().string() + ":" + std::to_string(line);
}

Real parse_real(std::string_view token, const fs::path& file, std::size_t line) {
  token = trim(token);
  double v = 0;
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), last, v);
  if (ec != std::errc() || ptr != last) {
    throw DatasetError(where(file, line) + ": not a number: '" + std::string(token) + "'");
  }
  return static_cast<Real>(v);
}

std::size_t parse_index(std::string_view token, const fs::path& file, std::size_t line) {
  token = trim(token);
  std::size_t v = 0;
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), last, v);
  if (ec != std::errc() || ptr != last) {
    throw DatasetError(where(file, line) + ": not a non-negative integer: '" +
                       std::string(token) + "'");
  }
  return v;
}

std::string format_real(Real v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Fisher-Yates with a fixed reduction so splits do not depend on the
// standard library's distribution implementations.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

ContentCitesLoad load_content_cites(const fs::path& content, const fs::path& cites) {
  ContentCitesLoad result;
  std::unordered_map<std::string, std::size_t> id_of;
  std::unordered_map<std::string, int> class_of;
  std::vector<Real> features;
  std::vector<int> labels;
  std::size_t num_features = 0;

  {
    auto in = open_input(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto tokens = split_tokens(line, " \t\r");
      if (tokens.empty()) continue;
      if (tokens.size() < 3) {
        throw DatasetError(where(content, lineno) + ": expected id, features and label");
      }
      const std::size_t f = tokens.size() - 2;
      if (result.node_ids.empty()) {
        num_features = f;
      } else if (f != num_features) {
        throw DatasetError(where(content, lineno) + ": " + std::to_string(f) +
                           " feature columns, expected " + std::to_string(num_features));
      }
      std::string id(tokens.front());
      if (!id_of.emplace(id, result.node_ids.size()).second) {
        throw DatasetError(where(content, lineno) + ": duplicate node id '" + id + "'");
      }
      result.node_ids.push_back(std::move(id));
      for (std::size_t k = 1; k <= f; ++k) features.push_back(parse_real(tokens[k], content, lineno));
      std::string label(tokens.back());
      auto [it, inserted] = class_of.emplace(label, static_cast<int>(result.class_names.size()));
      if (inserted) result.class_names.push_back(label);
      labels.push_back(it->second);
    }
    if (result.node_ids.empty()) throw DatasetError(content.string() + ": empty content file");
  }

  std::vector<EdgePair> edges;
  {
    auto in = open_input(cites);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto tokens = split_tokens(line, " \t\r");
      if (tokens.empty()) continue;
      if (tokens.size() != 2) {
        throw DatasetError(where(cites, lineno) + ": expected 'cited citing', got " +
                           std::to_string(tokens.size()) + " fields");
      }
      ++result.citation_rows;
      const auto a = id_of.find(std::string(tokens[0]));
      const auto b = id_of.find(std::string(tokens[1]));
      if (a == id_of.end() || b == id_of.end()) {
        ++result.dropped_unknown;
        continue;
      }
      if (a->second == b->second) {
        ++result.dropped_self_loops;
        continue;
      }
      edges.emplace_back(a->second, b->second);
    }
    if (result.citation_rows == 0) throw DatasetError(cites.string() + ": empty cites file");
  }

  const std::size_t n = result.node_ids.size();
  result.graph = CsrGraph::build(n, edges, DenseMatrix(n, num_features, std::move(features)),
                                 NodeLabels::single(std::move(labels), result.class_names.size()));
  return result;
}

CsrGraph load_bundle(const fs::path& dir) {
  for (const char* name : {"meta.json", "edges.tsv", "features.csv", "labels.csv", "splits.csv"}) {
    if (!fs::exists(dir / name)) throw DatasetError("bundle " + dir.string() + " lacks " + name);
  }

  nlohmann::json meta;
  try {
    auto in = open_input(dir / "meta.json");
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("meta.json: " + std::string(e.what()));
  }
  std::size_t n = 0, f = 0, c = 0;
  std::string task;
  try {
    n = meta.at("num_nodes").get<std::size_t>();
    f = meta.at("num_features").get<std::size_t>();
    c = meta.at("num_classes").get<std::size_t>();
    task = meta.at("task").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("meta.json: " + std::string(e.what()));
  }
  if (task != "single" && task != "multi") {
    throw DatasetError("meta.json: task must be 'single' or 'multi', got '" + task + "'");
  }

  std::vector<Real> features;
  features.reserve(n * f);
  {
    const fs::path path = dir / "features.csv";
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto fields = split_fields(trim(line), ',');
      if (fields.size() != f) {
        throw DatasetError(where(path, lineno) + ": " + std::to_string(fields.size()) +
                           " features, meta.json says " + std::to_string(f));
      }
      for (auto tok : fields) features.push_back(parse_real(tok, path, lineno));
    }
    if (features.size() != n * f) {
      throw DatasetError("features.csv has " + std::to_string(features.size() / std::max<std::size_t>(f, 1)) +
                         " rows, meta.json says " + std::to_string(n));
    }
  }

  NodeLabels labels;
  {
    const fs::path path = dir / "labels.csv";
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<int> classes;
    std::vector<Real> multi;
    std::size_t rows = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto fields = split_fields(trim(line), ',');
      if (rows == 0) width = fields.size();
      if (fields.size() != width) throw DatasetError(where(path, lineno) + ": ragged label row");
      ++rows;
      if (width == 1 && task == "single") {
        classes.push_back(static_cast<int>(parse_index(fields[0], path, lineno)));
      } else {
        for (auto tok : fields) multi.push_back(parse_real(tok, path, lineno));
      }
    }
    if (rows != n) {
      throw DatasetError("labels.csv has " + std::to_string(rows) + " rows, meta.json says " +
                         std::to_string(n));
    }
    const bool is_multi = width > 1 || task == "multi";
    if (is_multi != (task == "multi")) {
      throw DatasetError("labels.csv shape (" + std::to_string(width) +
                         " columns) contradicts meta.json task '" + task + "'");
    }
    if (is_multi) {
      if (width != c) {
        throw DatasetError("labels.csv has " + std::to_string(width) +
                           " label columns, meta.json says " + std::to_string(c));
      }
      labels = NodeLabels::multi_label(DenseMatrix(n, c, std::move(multi)));
    } else {
      labels = NodeLabels::single(std::move(classes), c);
    }
  }

  std::vector<NodeSplit> splits;
  {
    const fs::path path = dir / "splits.csv";
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto tok = trim(line);
      if (tok.empty()) continue;
      if (tok == "train") splits.push_back(NodeSplit::Train);
      else if (tok == "val") splits.push_back(NodeSplit::Val);
      else if (tok == "test") splits.push_back(NodeSplit::Test);
      else if (tok == "none") splits.push_back(NodeSplit::None);
      else throw DatasetError(where(path, lineno) + ": unknown split '" + std::string(tok) + "'");
    }
    if (splits.size() != n) {
      throw DatasetError("splits.csv has " + std::to_string(splits.size()) +
                         " rows, meta.json says " + std::to_string(n));
    }
  }

  std::vector<EdgePair> edges;
  {
    const fs::path path = dir / "edges.tsv";
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto tokens = split_tokens(line, "\t \r");
      if (tokens.empty()) continue;
      if (tokens.size() != 2) throw DatasetError(where(path, lineno) + ": expected src<TAB>dst");
      const std::size_t u = parse_index(tokens[0], path, lineno);
      const std::size_t v = parse_index(tokens[1], path, lineno);
      if (u >= n || v >= n) {
        throw DatasetError(where(path, lineno) + ": node id out of range for " +
                           std::to_string(n) + " nodes");
      }
      if (u != v) edges.emplace_back(u, v);
    }
  }

  return CsrGraph::build(n, edges, DenseMatrix(n, f, std::move(features)), std::move(labels),
                         std::move(splits));
}

void save_bundle(const CsrGraph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  const bool multi = graph.task() == TaskKind::MultiLabel;
  {
    nlohmann::json meta = {{"num_nodes", graph.num_nodes()},
                           {"num_features", graph.num_features()},
                           {"num_classes", graph.num_classes()},
                           {"task", multi ? "multi" : "single"}};
    std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "edges.tsv");
    for (const auto& [u, v] : graph.undirected_edges()) out << u << '\t' << v << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    const DenseMatrix& x = graph.features();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) out << (c ? "," : "") << format_real(x(r, c));
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    const NodeLabels& labels = graph.labels();
    for (std::size_t r = 0; r < graph.num_nodes(); ++r) {
      if (multi) {
        for (std::size_t c = 0; c < labels.multi.cols(); ++c)
          out << (c ? "," : "") << (labels.multi(r, c) != Real(0) ? 1 : 0);
      } else {
        out << labels.classes[r];
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "splits.csv");
    for (NodeSplit s : graph.splits()) out << to_string(s) << '\n';
  }
}

CsrGraph planetoid_split(const CsrGraph& graph, std::size_t per_class_train,
                         std::size_t num_val, std::size_t num_test, std::uint64_t seed) {
  if (graph.task() != TaskKind::SingleLabel) {
    throw DatasetError("planetoid_split requires a single-label graph");
  }
  std::mt19937_64 rng(seed);
  const std::size_t c = graph.num_classes();
  std::vector<std::vector<std::size_t>> by_class(c);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    by_class[static_cast<std::size_t>(graph.labels().classes[v])].push_back(v);
  }
  std::vector<NodeSplit> splits(graph.num_nodes(), NodeSplit::None);
  std::vector<std::size_t> rest;
  for (std::size_t k = 0; k < c; ++k) {
    auto& nodes = by_class[k];
    if (nodes.size() < per_class_train) {
      throw DatasetError("class " + std::to_string(k) + " has " + std::to_string(nodes.size()) +
                         " nodes, fewer than " + std::to_string(per_class_train) +
                         " training nodes requested");
    }
    shuffle(nodes, rng);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i < per_class_train) splits[nodes[i]] = NodeSplit::Train;
      else rest.push_back(nodes[i]);
    }
  }
  if (rest.size() < num_val + num_test) {
    throw DatasetError("only " + std::to_string(rest.size()) + " nodes remain for " +
                       std::to_string(num_val) + " validation and " + std::to_string(num_test) +
                       " test nodes");
  }
  std::sort(rest.begin(), rest.end());
  shuffle(rest, rng);
  for (std::size_t i = 0; i < num_val; ++i) splits[rest[i]] = NodeSplit::Val;
  for (std::size_t i = 0; i < num_test; ++i) splits[rest[num_val + i]] = NodeSplit::Test;
  return graph.with_splits(std::move(splits));
}

CsrGraph generate_sbm(const SbmParams& p) {
  if (!(p.p_out >= 0.0 && p.p_out < p.p_in && p.p_in <= 1.0)) {
    throw ConfigError("generate_sbm: need 0 <= p_out < p_in <= 1");
  }
  if (p.blocks == 0 || p.nodes_per_block == 0) throw ConfigError("generate_sbm: empty model");
  if (p.feature_dim < p.blocks) {
    throw ConfigError("generate_sbm: feature_dim must be at least the block count");
  }
  const std::size_t n = p.blocks * p.nodes_per_block;
  std::mt19937_64 rng(p.seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<EdgePair> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const bool same = u / p.nodes_per_block == v / p.nodes_per_block;
      if (uniform() < (same ? p.p_in : p.p_out)) edges.emplace_back(u, v);
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix features(n, p.feature_dim);
  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t block = v / p.nodes_per_block;
    labels[v] = static_cast<int>(block);
    features(v, block) = Real(1);
    if (p.noise > 0) {
      for (std::size_t k = 0; k < p.feature_dim; ++k)
        features(v, k) += static_cast<Real>(p.noise * gauss(rng));
    }
  }
  return CsrGraph::build(n, edges, std::move(features), NodeLabels::single(std::move(labels), p.blocks));
}

ALIGNAHEAD_NAMESPACE_END
