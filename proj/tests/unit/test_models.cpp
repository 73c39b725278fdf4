#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alignahead/errors.hpp"
#include "alignahead/grad_check.hpp"
#include "alignahead/student.hpp"
#include "test_support.hpp"

using namespace alignahead;
using testing::random_matrix;

namespace {

CsrGraph graph_with(std::size_t n, std::vector<EdgePair> edges, DenseMatrix features,
                    std::size_t classes = 2) {
  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(v % classes);
  return CsrGraph::build(n, edges, std::move(features), NodeLabels::single(labels, classes));
}

LayerInput dense_input(const DenseMatrix& x) { return LayerInput{constant(x), nullptr}; }

DiffValue weighted_sum(const DiffValue& x, std::uint64_t seed) {
  return sum(hadamard(x, constant(random_matrix(x.rows(), x.cols(), seed))));
}

LayerSpec spec(LayerKind kind, std::size_t in, std::size_t out, Activation act = Activation::None,
               std::size_t heads = 1, bool concat = false) {
  LayerSpec s;
  s.kind = kind;
  s.in_dim = in;
  s.out_dim = out;
  s.heads = heads;
  s.concat_heads = concat;
  s.activation = act;
  return s;
}

}  // namespace

TEST_CASE("gcn: single node with self-loop and identity weight returns the input") {
  const auto g = graph_with(1, {}, DenseMatrix::from_rows({{0.3, -2}}), 1);
  const auto out = gcn_layer(dense_input(g.features()), g.normalized_adjacency(),
                             constant(DenseMatrix::identity(2)), constant(DenseMatrix(1, 2)),
                             Activation::None);
  CHECK(out.value() == g.features());
}

TEST_CASE("gcn: two connected nodes average") {
  const auto g = graph_with(2, {{0, 1}}, DenseMatrix::from_rows({{2}, {4}}));
  const auto out = gcn_layer(dense_input(g.features()), g.normalized_adjacency(),
                             constant(DenseMatrix(1, 1, 1.0)), constant(DenseMatrix(1, 1)),
                             Activation::None);
  CHECK(max_abs_diff(out.value(), DenseMatrix::from_rows({{3}, {3}})) < 1e-15);
}

TEST_CASE("gcn: three-node one-layer model matches a dense oracle") {
  // Path 0-1-2; degrees with self-loops are 2, 3, 2.
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0.5}, {-1, 2}, {0.25, 0}});
  const auto g = graph_with(3, {{0, 1}, {1, 2}}, x);
  const DenseMatrix w = DenseMatrix::from_rows({{0.2, -0.4}, {0.7, 0.1}});
  const DenseMatrix b = DenseMatrix::from_rows({{0.05, -0.05}});
  StudentModel model({GnnLayer(spec(LayerKind::Gcn, 2, 2), {w, b})}, {}, std::nullopt);
  const auto trace = forward(model, g);

  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  const double a[3][3] = {{1 / 2.0, 1 / (s2 * s3), 0},
                          {1 / (s2 * s3), 1 / 3.0, 1 / (s2 * s3)},
                          {0, 1 / (s2 * s3), 1 / 2.0}};
  double max_err = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      double want = b(0, c);
      for (std::size_t j = 0; j < 3; ++j) {
        double xw = 0;
        for (std::size_t k = 0; k < 2; ++k) xw += x(j, k) * w(k, c);
        want += a[i][j] * xw;
      }
      max_err = std::max(max_err, std::abs(want - trace.logits.back().value()(i, c)));
    }
  }
  CHECK(max_err < 1e-12);
}

TEST_CASE("gcn: gradient check on a 5-node random graph") {
  const auto g = testing::random_graph(5, 3, 2, 7);
  auto w = parameter(random_matrix(3, 4, 1));
  auto b = parameter(random_matrix(1, 4, 2));
  std::vector<DiffValue> params{w, b};
  const auto r = grad_check(
      [&] {
        return weighted_sum(gcn_layer(dense_input(g.features()), g.normalized_adjacency(), w, b,
                                      Activation::Elu),
                            3);
      },
      params);
  CHECK(r.max_relative_error < 1e-6);
}

TEST_CASE("sage: one neighbor aggregates to that neighbor") {
  const DenseMatrix x = DenseMatrix::from_rows({{1, 2}, {-3, 5}});
  const auto g = graph_with(2, {{0, 1}}, x);
  const auto zero = constant(DenseMatrix(2, 2));
  const auto eye = constant(DenseMatrix::identity(2));
  const auto nob = constant(DenseMatrix(1, 2));
  const auto mean_out =
      sage_layer(LayerKind::SageMean, dense_input(x), g, SageParams{zero, eye, nob, {}, {}}, Activation::None);
  CHECK(mean_out.value() == DenseMatrix::from_rows({{-3, 5}, {1, 2}}));

  const DenseMatrix wp = DenseMatrix::from_rows({{0.5, -1}, {0.25, 1}});
  const DenseMatrix bp = DenseMatrix::from_rows({{0.1, -0.2}});
  const auto pool_out = sage_layer(LayerKind::SagePool, dense_input(x), g,
                                   SageParams{zero, eye, nob, constant(wp), constant(bp)}, Activation::None);
  const DenseMatrix pre = multiply(x, wp);
  for (std::size_t v = 0; v < 2; ++v) {
    const std::size_t u = 1 - v;
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(pool_out.value()(v, c) == doctest::Approx(std::max(0.0, pre(u, c) + bp(0, c))));
    }
  }
}

TEST_CASE("sage: isolated node aggregates to zero") {
  const DenseMatrix x = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const auto g = graph_with(3, {{0, 1}}, x);
  const auto zero = constant(DenseMatrix(2, 2));
  const auto eye = constant(DenseMatrix::identity(2));
  const auto out = sage_layer(LayerKind::SageMean, dense_input(x), g,
                              SageParams{zero, eye, constant(DenseMatrix(1, 2)), {}, {}}, Activation::None);
  CHECK(out.value()(2, 0) == 0);
  CHECK(out.value()(2, 1) == 0);
}

TEST_CASE("sage: gradient checks for mean and tie-free pool") {
  const auto g = testing::random_graph(6, 3, 2, 8);
  for (LayerKind kind : {LayerKind::SageMean, LayerKind::SagePool}) {
    std::mt19937_64 rng(4);
    GnnLayer layer(spec(kind, 3, 4, Activation::Elu), rng);
    // Nonzero pool bias keeps relu away from exact zeros.
    std::vector<DiffValue> params = layer.parameters();
    for (auto& p : params) {
      if (p.rows() == 1) p.mutable_value() = random_matrix(1, p.cols(), 5, 0.1, 0.5);
    }
    const auto r = grad_check([&] { return weighted_sum(layer.forward(dense_input(g.features()), g), 6); },
                              params);
    CAPTURE(to_string(kind));
    CHECK(r.max_relative_error < 1e-6);
    CHECK_FALSE(r.kink_unresolved);
  }
}

TEST_CASE("gat: isolated node attends only to itself") {
  const DenseMatrix x = DenseMatrix::from_rows({{1, -1}});
  const auto g = graph_with(1, {}, x, 1);
  const DenseMatrix w = DenseMatrix::from_rows({{2, 0, 1}, {1, 1, 0}});
  const GatHead head{constant(w), constant(random_matrix(3, 1, 1)), constant(random_matrix(3, 1, 2))};
  const auto wh = project(dense_input(x), head.w);
  CHECK(gat_attention(wh, head, g).value() == DenseMatrix(1, 1, 1.0));
  const std::vector<GatHead> heads{head};
  const auto out = gat_layer(dense_input(x), g, heads, constant(DenseMatrix(1, 3)), false, Activation::None);
  CHECK(max_abs_diff(out.value(), multiply(x, w)) < 1e-15);
}

TEST_CASE("gat: identical neighbor features give uniform attention") {
  const DenseMatrix x(4, 3, 0.7);
  const auto g = graph_with(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}}, x);
  const GatHead head{constant(random_matrix(3, 2, 3)), constant(random_matrix(2, 1, 4)),
                     constant(random_matrix(2, 1, 5))};
  const auto alpha = gat_attention(project(dense_input(x), head.w), head, g).value();
  const auto& segs = g.attention_segments();
  for (std::size_t v = 0; v < 4; ++v) {
    for (std::size_t e = segs.begin(v); e < segs.end(v); ++e) {
      CHECK(alpha[e] == doctest::Approx(1.0 / static_cast<double>(segs.length(v))).epsilon(1e-12));
    }
  }
}

TEST_CASE("gat: attention rows sum to one") {
  const auto g = testing::random_graph(12, 4, 3, 9, 0.4, true);
  const GatHead head{constant(random_matrix(4, 5, 6)), constant(random_matrix(5, 1, 7, -3, 3)),
                     constant(random_matrix(5, 1, 8, -3, 3))};
  const auto alpha = gat_attention(project(dense_input(g.features()), head.w), head, g).value();
  const auto& segs = g.attention_segments();
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    double s = 0;
    for (std::size_t e = segs.begin(v); e < segs.end(v); ++e) s += alpha[e];
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("gat: gradient check, 4 nodes, 2 heads") {
  const auto g = graph_with(4, {{0, 1}, {1, 2}, {2, 3}, {0, 2}}, random_matrix(4, 3, 10));
  for (bool concat : {true, false}) {
    std::mt19937_64 rng(11);
    GnnLayer layer(spec(LayerKind::Gat, 3, 2, concat ? Activation::Elu : Activation::None, 2, concat), rng);
    std::vector<DiffValue> params = layer.parameters();
    const auto r = grad_check([&] { return weighted_sum(layer.forward(dense_input(g.features()), g), 12); },
                              params);
    CHECK(r.max_relative_error < 1e-5);
    CHECK(layer.forward(dense_input(g.features()), g).cols() == (concat ? 4u : 2u));
  }
}

TEST_CASE("every layer kind: gradients of the whole student match finite differences") {
  const auto g = testing::random_graph(7, 4, 3, 12);
  for (LayerKind kind : {LayerKind::Gcn, LayerKind::SageMean, LayerKind::SagePool, LayerKind::Gat}) {
    ModelSpec m;
    m.kind = kind;
    m.layers = 3;
    m.hidden = 3;
    m.heads = 2;
    auto model = build_student(backbone_specs(m, 4, 3), AuxSpec{AuxKind::Gnn, 1}, 13);
    auto params = model.parameters();
    for (auto& p : params) {
      if (p.rows() == 1) p.mutable_value() = random_matrix(1, p.cols(), 14, 0.05, 0.3);
    }
    const auto r = grad_check(
        [&] {
          const auto t = forward(model, g);
          DiffValue s = weighted_sum(t.logits[0], 15);
          for (std::size_t i = 1; i < t.logits.size(); ++i) s = add(s, weighted_sum(t.logits[i], 15 + i));
          return s;
        },
        params);
    CAPTURE(to_string(kind));
    CHECK(r.max_relative_error < 1e-5);
    CHECK_FALSE(r.kink_unresolved);
  }
}

TEST_CASE("forward is equivariant under node permutations") {
  const std::size_t n = 9;
  const auto g = testing::random_graph(n, 4, 3, 16, 0.35, true);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(17));  // new id of node v is perm[v]

  std::vector<EdgePair> edges;
  for (auto [u, v] : g.undirected_edges()) edges.emplace_back(perm[u], perm[v]);
  DenseMatrix x(n, 4);
  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t f = 0; f < 4; ++f) x(perm[v], f) = g.features()(v, f);
    labels[perm[v]] = g.labels().classes[v];
  }
  const auto pg = CsrGraph::build(n, edges, x, NodeLabels::single(labels, 3));

  for (LayerKind kind : {LayerKind::Gcn, LayerKind::SageMean, LayerKind::SagePool, LayerKind::Gat}) {
    ModelSpec m;
    m.kind = kind;
    m.layers = 3;
    m.hidden = 5;
    m.heads = 2;
    const auto model = build_student(backbone_specs(m, 4, 3), AuxSpec{}, 18);
    const auto a = forward(model, g);
    const auto b = forward(model, pg);
    double err = 0;
    for (std::size_t i = 0; i < a.depth(); ++i) {
      for (const auto* pair : {&a.activations, &a.logits}) {
        const auto& mine = (*pair)[i].value();
        const auto& theirs = (pair == &a.activations ? b.activations : b.logits)[i].value();
        for (std::size_t v = 0; v < n; ++v) {
          for (std::size_t c = 0; c < mine.cols(); ++c) err = std::max(err, std::abs(mine(v, c) - theirs(perm[v], c)));
        }
      }
    }
    CAPTURE(to_string(kind));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("build_student: aux classifiers and determinism") {
  ModelSpec m;
  m.layers = 3;
  const auto specs = backbone_specs(m, 6, 4);
  const auto a = build_student(specs, AuxSpec{AuxKind::Gnn, 1}, 5);
  CHECK(a.aux().size() == 2);
  for (const auto& head : a.aux()) {
    REQUIRE(head.size() == 1);
    CHECK(head[0].spec().kind == LayerKind::Gcn);
    CHECK(head[0].spec().out_dim == 4);
  }
  const auto b = build_student(specs, AuxSpec{AuxKind::Gnn, 1}, 5);
  const auto pa = a.parameters(), pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].value() == pb[i].value());
  CHECK(build_student(specs, std::nullopt, 6).parameters()[0].value() != pa[0].value());
  CHECK(build_student(specs, std::nullopt, 5).aux().empty());
  CHECK_THROWS_AS(build_student(specs, AuxSpec{AuxKind::Gnn, 0}, 5), ConfigError);
}

TEST_CASE("build_student: mlp aux of depth 2 is two affine maps with relu between") {
  ModelSpec m;
  m.layers = 2;
  m.hidden = 8;
  const auto model = build_student(backbone_specs(m, 3, 5), AuxSpec{AuxKind::Mlp, 2}, 1);
  REQUIRE(model.aux().size() == 1);
  const auto& head = model.aux()[0];
  REQUIRE(head.size() == 2);
  CHECK(head[0].spec() == spec(LayerKind::Mlp, 8, 8, Activation::Relu));
  CHECK(head[1].spec() == spec(LayerKind::Mlp, 8, 5, Activation::None));
}

TEST_CASE("build_student: gat aux uses one head") {
  ModelSpec m;
  m.kind = LayerKind::Gat;
  m.layers = 2;
  m.hidden = 4;
  m.heads = 3;
  const auto model = build_student(backbone_specs(m, 3, 2), AuxSpec{}, 1);
  CHECK(model.layers()[0].spec().output_dim() == 12);
  CHECK(model.aux()[0][0].spec().kind == LayerKind::Gat);
  CHECK(model.aux()[0][0].spec().heads == 1);
  CHECK(model.aux()[0][0].spec().in_dim == 12);
}

TEST_CASE("build_student: broken dimension chain") {
  const std::vector<LayerSpec> specs{spec(LayerKind::Gcn, 3, 4, Activation::Relu),
                                     spec(LayerKind::Gcn, 5, 2)};
  CHECK_THROWS_AS(build_student(specs, std::nullopt, 0), ConfigError);
}

TEST_CASE("forward: two-layer trace shape") {
  const auto g = testing::random_graph(6, 3, 2, 20);
  ModelSpec m;
  const auto model = build_student(backbone_specs(m, 3, 2), AuxSpec{}, 2);
  const auto t = forward(model, g);
  CHECK(t.activations.size() == 2);
  CHECK(t.logits.size() == 2);
  CHECK(model.aux().size() == 1);
  for (const auto& l : t.logits) {
    CHECK(l.rows() == 6);
    CHECK(l.cols() == 2);
  }
  CHECK(t.logits[1].value() == t.activations[1].value());
  CHECK_FALSE(forward(model, g, false).logits[0].defined());

  const auto wrong = testing::random_graph(6, 4, 2, 20);
  CHECK_THROWS_AS(forward(model, wrong), ShapeError);
}

TEST_CASE("forward: zero weights give zero logits and uniform softmax") {
  const auto g = testing::random_graph(5, 3, 4, 21);
  ModelSpec m;
  m.layers = 2;
  std::vector<GnnLayer> layers;
  for (const auto& s : backbone_specs(m, 3, 4)) {
    std::vector<DenseMatrix> values;
    for (auto [r, c] : GnnLayer::shapes_for(s)) values.emplace_back(r, c);
    layers.emplace_back(s, std::move(values));
  }
  const StudentModel model(std::move(layers), {}, std::nullopt);
  const auto t = forward(model, g);
  CHECK(t.output().value() == DenseMatrix(5, 4));
  const auto p = row_softmax(t.output()).value();
  for (Real v : p.values()) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("clone makes independent parameters; copies share them") {
  ModelSpec m;
  const auto model = build_student(backbone_specs(m, 3, 2), AuxSpec{}, 3);
  const auto shared = model;
  const auto deep = model.clone();
  model.parameters()[0].mutable_value()(0, 0) += 1;
  CHECK(shared.parameters()[0].value() == model.parameters()[0].value());
  CHECK(deep.parameters()[0].value() != model.parameters()[0].value());
  CHECK(deep.parameter_names() == model.parameter_names());
}

TEST_CASE("parameter names") {
  ModelSpec m;
  const auto model = build_student(backbone_specs(m, 3, 2), AuxSpec{}, 3);
  CHECK(model.parameter_names() ==
        std::vector<std::string>{"layer0.w", "layer0.b", "layer1.w", "layer1.b", "aux0.0.w", "aux0.0.b"});
  CHECK(model.num_parameters() == 3 * 16 + 16 + 16 * 2 + 2 + 16 * 2 + 2);
}
