#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "alignahead/datasets.hpp"
#include "alignahead/errors.hpp"
#include "test_support.hpp"

using namespace alignahead;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("alignahead_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file) << text;
    return path / file;
  }
};

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DatasetError& e) {
    return e.what();
  }
  return {};
}

void write_bundle(const TempDir& dir, const std::string& meta, const std::string& edges,
                  const std::string& features, const std::string& labels,
                  const std::string& splits) {
  dir.write("meta.json", meta);
  dir.write("edges.tsv", edges);
  dir.write("features.csv", features);
  dir.write("labels.csv", labels);
  dir.write("splits.csv", splits);
}

const char* kTwoNodeMeta = R"({"num_nodes": 2, "num_features": 2, "num_classes": 2, "task": "single"})";

}  // namespace

TEST_CASE("content/cites: toy files") {
  TempDir dir("toy");
  const auto content = dir.write("toy.content", "p1\t1\t0\tA\np2\t0\t1\tB\np3\t1\t1\tA\n");
  const auto cites = dir.write("toy.cites", "p1\tp2\n");
  const auto load = load_content_cites(content, cites);
  CHECK(load.graph.num_nodes() == 3);
  CHECK(load.graph.num_undirected_edges() == 1);
  CHECK(load.graph.num_features() == 2);
  CHECK(load.graph.num_classes() == 2);
  CHECK(load.graph.labels().classes == std::vector<int>{0, 1, 0});
  CHECK(load.class_names == std::vector<std::string>{"A", "B"});
  CHECK(load.dropped_unknown == 0);
}

TEST_CASE("content/cites: unknown ids are dropped and counted") {
  TempDir dir("unknown");
  const auto content = dir.write("c", "p1 1 A\np2 0 B\n");
  const auto cites = dir.write("e", "p1 p2\np2 p1\np1 ghost\n");
  const auto load = load_content_cites(content, cites);
  CHECK(load.dropped_unknown == 1);
  CHECK(load.citation_rows == 3);
  CHECK(load.graph.num_undirected_edges() == 1);  // reverse pair deduplicated
}

TEST_CASE("content/cites: malformed rows name their line") {
  TempDir dir("malformed");
  const auto cites = dir.write("e", "a b\n");
  const auto bad_feature = dir.write("c1", "a 1 X\nb q X\n");
  CHECK(error_of([&] { load_content_cites(bad_feature, cites); }).find(":2") != std::string::npos);
  const auto ragged = dir.write("c2", "a 1 0 X\nb 1 X\n");
  CHECK(error_of([&] { load_content_cites(ragged, cites); }).find(":2") != std::string::npos);
  const auto good = dir.write("c3", "a 1 X\nb 0 X\n");
  const auto bad_cites = dir.write("e2", "a b\na\n");
  CHECK(error_of([&] { load_content_cites(good, bad_cites); }).find(":2") != std::string::npos);
}

TEST_CASE("content/cites: empty files are errors") {
  TempDir dir("empty");
  const auto empty = dir.write("empty", "");
  const auto good = dir.write("c", "a 1 X\n");
  CHECK_THROWS_AS(load_content_cites(empty, dir.write("e", "a a\n")), DatasetError);
  CHECK_THROWS_AS(load_content_cites(good, empty), DatasetError);
  CHECK_THROWS_AS(load_content_cites(dir.path / "missing", empty), DatasetError);
}

TEST_CASE("bundle: minimal two-node bundle") {
  TempDir dir("bundle_min");
  write_bundle(dir, kTwoNodeMeta, "0\t1\n", "1,0\n0,1\n", "0\n1\n", "train\ntest\n");
  const auto g = load_bundle(dir.path);
  CHECK(g.num_nodes() == 2);
  CHECK(g.num_undirected_edges() == 1);
  CHECK(g.task() == TaskKind::SingleLabel);
  CHECK(g.splits() == std::vector<NodeSplit>{NodeSplit::Train, NodeSplit::Test});
}

TEST_CASE("bundle: multi-label matrix") {
  TempDir dir("bundle_multi");
  write_bundle(dir, R"({"num_nodes": 2, "num_features": 1, "num_classes": 3, "task": "multi"})", "0\t1\n",
               "0.5\n-1\n", "1,0,1\n0,0,1\n", "train\nval\n");
  const auto g = load_bundle(dir.path);
  CHECK(g.task() == TaskKind::MultiLabel);
  CHECK(g.labels().multi == DenseMatrix::from_rows({{1, 0, 1}, {0, 0, 1}}));
}

TEST_CASE("bundle: rejected inputs") {
  TempDir dir("bundle_bad");
  SUBCASE("overlapping masks") {
    write_bundle(dir, kTwoNodeMeta, "0\t1\n", "1,0\n0,1\n", "0\n1\n", "train,val\ntest\n");
  }
  SUBCASE("missing file") {
    write_bundle(dir, kTwoNodeMeta, "0\t1\n", "1,0\n0,1\n", "0\n1\n", "train\ntest\n");
    fs::remove(dir.path / "labels.csv");
  }
  SUBCASE("node counts disagree") {
    write_bundle(dir, kTwoNodeMeta, "0\t1\n", "1,0\n0,1\n1,1\n", "0\n1\n", "train\ntest\n");
  }
  SUBCASE("split count disagrees") {
    write_bundle(dir, kTwoNodeMeta, "0\t1\n", "1,0\n0,1\n", "0\n1\n", "train\n");
  }
  SUBCASE("edge id out of range") {
    write_bundle(dir, kTwoNodeMeta, "0\t2\n", "1,0\n0,1\n", "0\n1\n", "train\ntest\n");
  }
  SUBCASE("label shape does not match the task") {
    write_bundle(dir, kTwoNodeMeta, "0\t1\n", "1,0\n0,1\n", "1,0\n0,1\n", "train\ntest\n");
  }
  CHECK_THROWS_AS(load_bundle(dir.path), DatasetError);
}

TEST_CASE("bundle: save then load round-trips") {
  TempDir dir("bundle_roundtrip");
  const auto g = testing::random_graph(15, 4, 3, 2);
  save_bundle(g, dir.path);
  const auto back = load_bundle(dir.path);
  CHECK(back.edge_sources() == g.edge_sources());
  CHECK(back.edge_targets() == g.edge_targets());
  CHECK(back.features() == g.features());
  CHECK(back.labels().classes == g.labels().classes);
  CHECK(back.num_classes() == g.num_classes());
  CHECK(back.splits() == g.splits());

  TempDir again("bundle_roundtrip2");
  save_bundle(back, again.path);
  for (const char* name : {"meta.json", "edges.tsv", "features.csv", "labels.csv", "splits.csv"}) {
    std::ifstream a(dir.path / name), b(again.path / name);
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
  }
}

TEST_CASE("planetoid split: counts, disjointness, determinism") {
  SbmParams p;
  p.blocks = 7;
  p.nodes_per_block = 40;
  const auto g = generate_sbm(p);
  const auto s = planetoid_split(g, 20, 50, 60, 3);
  CHECK(s.nodes_in(NodeSplit::Train).size() == 140);
  CHECK(s.nodes_in(NodeSplit::Val).size() == 50);
  CHECK(s.nodes_in(NodeSplit::Test).size() == 60);
  std::vector<int> per_class(7, 0);
  for (std::size_t v : s.nodes_in(NodeSplit::Train)) ++per_class[s.labels().classes[v]];
  for (int c : per_class) CHECK(c == 20);
  CHECK(planetoid_split(g, 20, 50, 60, 3).splits() == s.splits());
  CHECK(planetoid_split(g, 20, 50, 60, 4).splits() != s.splits());
}

TEST_CASE("planetoid split: infeasible requests") {
  SbmParams p;
  p.blocks = 2;
  p.nodes_per_block = 10;
  const auto g = generate_sbm(p);
  CHECK_THROWS_AS(planetoid_split(g, 20, 0, 0, 0), DatasetError);
  CHECK_THROWS_AS(planetoid_split(g, 5, 6, 5, 0), DatasetError);
  CHECK_NOTHROW(planetoid_split(g, 5, 5, 5, 0));
}

TEST_CASE("sbm: forced topology gives two disjoint cliques") {
  SbmParams p;
  p.blocks = 2;
  p.nodes_per_block = 3;
  p.p_in = 1.0;
  p.p_out = 0.0;
  p.feature_dim = 2;
  const auto g = generate_sbm(p);
  CHECK(g.num_undirected_edges() == 6);
  for (auto [u, v] : g.undirected_edges()) CHECK(u / 3 == v / 3);
  for (std::size_t v = 0; v < 6; ++v) CHECK(g.degree(v) == 2);
}

TEST_CASE("sbm: zero noise gives exact one-hot features") {
  SbmParams p;
  p.noise = 0.0;
  p.feature_dim = 6;
  const auto g = generate_sbm(p);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    for (std::size_t f = 0; f < 6; ++f) {
      CHECK(g.features()(v, f) == (static_cast<int>(f) == g.labels().classes[v] ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("sbm: mean intra-block edge count within 3 sigma over 100 seeds") {
  SbmParams p;
  p.blocks = 2;
  p.nodes_per_block = 20;
  p.p_in = 0.3;
  p.p_out = 0.05;
  const double pairs = 20.0 * 19.0 / 2.0;
  double total = 0;
  std::size_t samples = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    p.seed = seed;
    const auto g = generate_sbm(p);
    std::vector<double> intra(2, 0);
    for (auto [u, v] : g.undirected_edges()) {
      if (g.labels().classes[u] == g.labels().classes[v]) intra[g.labels().classes[u]] += 1;
    }
    total += intra[0] + intra[1];
    samples += 2;
  }
  const double expected = p.p_in * pairs;
  const double sigma = std::sqrt(pairs * p.p_in * (1 - p.p_in) / static_cast<double>(samples));
  CHECK(std::abs(total / samples - expected) < 3 * sigma);
}

TEST_CASE("sbm: deterministic in seed, invalid probabilities rejected") {
  SbmParams p;
  CHECK(generate_sbm(p).features() == generate_sbm(p).features());
  CHECK(generate_sbm(p).edge_targets() == generate_sbm(p).edge_targets());
  p.p_out = 0.5;
  p.p_in = 0.4;
  CHECK_THROWS_AS(generate_sbm(p), ConfigError);
}
