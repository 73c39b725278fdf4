#include <benchmark/benchmark.h>

#include "alignahead/datasets.hpp"
#include "alignahead/losses.hpp"
#include "alignahead/student.hpp"

namespace ah = alignahead;

namespace {

ah::CsrGraph bench_graph(std::size_t blocks, std::size_t per_block, std::size_t features) {
  ah::SbmParams p;
  p.blocks = blocks;
  p.nodes_per_block = per_block;
  p.p_in = 0.05;
  p.p_out = 0.002;
  p.feature_dim = features;
  p.noise = 0.1;
  p.seed = 7;
  return ah::planetoid_split(ah::generate_sbm(p), 5, 50, 100, 0);
}

ah::DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ah::DenseMatrix m(r, c);
  for (auto& v : m.values()) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ah::multiply(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_Spmm(benchmark::State& state) {
  const auto g = bench_graph(8, 300, 16);
  const auto x = random_matrix(g.num_nodes(), static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(g.normalized_adjacency().multiply(x));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.normalized_adjacency().nnz()));
}
BENCHMARK(BM_Spmm)->Arg(16)->Arg(128);

void BM_LayerForwardBackward(benchmark::State& state) {
  const auto kind = static_cast<ah::LayerKind>(state.range(0));
  const auto g = bench_graph(8, 300, 64);
  ah::ModelSpec m;
  m.kind = kind;
  m.layers = 2;
  m.hidden = 32;
  m.heads = kind == ah::LayerKind::Gat ? 2 : 1;
  const auto student = ah::build_student(ah::backbone_specs(m, g.num_features(), g.num_classes()),
                                         std::nullopt, 1);
  for (auto _ : state) {
    const auto trace = ah::forward(student, g);
    const auto loss = ah::label_loss(trace, g);
    ah::backward(loss);
    for (auto p : student.parameters()) p.zero_grad();
  }
  state.SetLabel(ah::to_string(kind));
}
BENCHMARK(BM_LayerForwardBackward)
    ->Arg(static_cast<int>(ah::LayerKind::Gcn))
    ->Arg(static_cast<int>(ah::LayerKind::SageMean))
    ->Arg(static_cast<int>(ah::LayerKind::SagePool))
    ->Arg(static_cast<int>(ah::LayerKind::Gat));

void BM_TotalLoss(benchmark::State& state) {
  const auto g = bench_graph(8, 300, 64);
  ah::ModelSpec m;
  m.layers = static_cast<std::size_t>(state.range(0));
  m.hidden = 32;
  const auto specs = ah::backbone_specs(m, g.num_features(), g.num_classes());
  const auto a = ah::build_student(specs, ah::AuxSpec{}, 1);
  const auto b = ah::build_student(specs, ah::AuxSpec{}, 2);
  ah::ForwardTrace peer;
  {
    ah::NoGradGuard no_grad;
    peer = ah::forward(b, g);
  }
  const ah::DistillConfig cfg;
  for (auto _ : state) {
    const auto self = ah::forward(a, g);
    const auto loss = ah::total_loss(self, std::span(&peer, 1), g, cfg);
    ah::backward(loss.total);
    for (auto p : a.parameters()) p.zero_grad();
  }
}
BENCHMARK(BM_TotalLoss)->Arg(3)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
