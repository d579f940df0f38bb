#include <benchmark/benchmark.h>

#include "an2vec/gradient.hpp"
#include "an2vec/optim.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

using namespace an2vec;

namespace {

// SBM with M communities of ten nodes and M colour features.
FeaturedGraph sbm_graph(int m) {
  SbmConfig s;
  s.m = m;
  FeatureConfig f;
  f.alpha = 0.5;
  return generate_featured_graph(s, f, 1);
}

TrainConfig desk_config() {
  TrainConfig c;
  c.split = {6, 4, 6};
  c.track_mean_loss = false;
  return c;
}

void BM_Spmm(benchmark::State& state) {
  const FeaturedGraph g = sbm_graph(static_cast<int>(state.range(0)));
  const NormalizedAdjacency a_hat = normalize_adjacency(g.adjacency);
  Rng rng(3);
  const DenseMatrix h = glorot_init(g.node_count(), 50, rng);
  for (auto _ : state) benchmark::DoNotOptimize(spmm(a_hat, h));
  state.counters["nnz"] = static_cast<double>(a_hat.nonzero_count());
}
BENCHMARK(BM_Spmm)->Arg(50)->Arg(100)->Arg(200);

void BM_ForwardBackward(benchmark::State& state) {
  const FeaturedGraph g = sbm_graph(static_cast<int>(state.range(0)));
  const ModelInputs in = ModelInputs::from(g);
  TrainConfig cfg = desk_config();
  cfg.decoder = state.range(1) ? AdjacencyDecoder::deep : AdjacencyDecoder::shallow;
  Rng rng(5);
  const ModelWeights w = init_weights(cfg.shape_for(g.feature_count()), rng);
  const auto eps = draw_standard_normal(g.node_count(), cfg.split.total(), cfg.k_samples, rng);
  for (auto _ : state) {
    const ForwardState fs = forward(w, in, eps, cfg.loss);
    benchmark::DoNotOptimize(backward(fs, w, in, cfg.loss));
  }
}
BENCHMARK(BM_ForwardBackward)->ArgsProduct({{50, 100}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const FeaturedGraph g = sbm_graph(static_cast<int>(state.range(0)));
  const ModelInputs in = ModelInputs::from(g);
  TrainConfig cfg = desk_config();
  cfg.epochs = 5;
  for (auto _ : state) benchmark::DoNotOptimize(train(in, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.epochs);
}
BENCHMARK(BM_TrainEpoch)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
