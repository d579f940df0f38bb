#include "an2vec/cli/gradcheck.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "an2vec/optim.hpp"

namespace an2vec::cli {

namespace {

bool usable(const SparseAdjacency& a) {
  const double d = density(a);
  return d > 0.0 && d < 1.0;
}

GradCheckCase check(const FeaturedGraph& g, const ModelShape& shape, const LossConfig& loss, int k,
                    std::uint64_t seed, FeatureTarget target = FeatureTarget::as_is) {
  Rng init(derive_seed(seed, stream::kInit));
  Rng noise(derive_seed(seed, stream::kNoise));
  const ModelWeights w = init_weights(shape, init);
  const auto eps = draw_standard_normal(g.node_count(), shape.split.total(), k, noise);
  const ModelInputs in = target == FeatureTarget::one_hot ? ModelInputs::from(g.adjacency, g.features, one_hot_rows(g.features))
                                                          : ModelInputs::from(g.adjacency, g.features);
  GradCheckCase c;
  c.variant = std::string(to_string(shape.decoder)) + "/" + std::string(to_string(shape.head)) +
              "/f_ax=" + std::to_string(shape.split.f_ax);
  c.nodes = g.node_count();
  c.report = finite_diff_check(w, in, eps, loss);
  return c;
}

}  // namespace

GradCheckSuite run_grad_check_suite(int instances, std::uint64_t seed) {
  constexpr AdjacencyDecoder kDecoders[] = {AdjacencyDecoder::deep, AdjacencyDecoder::shallow};
  constexpr FeatureHead kHeads[] = {FeatureHead::multinomial, FeatureHead::bernoulli, FeatureHead::gaussian};
  constexpr DimensionSplit kSplits[] = {{4, 0, 4}, {2, 2, 2}, {0, 4, 0}};

  GradCheckSuite suite;
  std::uint64_t draw = 0;
  for (int i = 0; i < instances; ++i) {
    const int v = i % 18;
    FeaturedGraph g;
    do {
      Rng rng(derive_seed(seed, stream::kData, draw));
      const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      g = generate_featured_graph({3, 3, 0.7, 0.2}, {alpha, 0.1}, derive_seed(seed, stream::kData, draw) + 1);
      ++draw;
    } while (!usable(g.adjacency));

    ModelShape shape;
    shape.n_features = g.feature_count();
    shape.hidden_enc = 5;
    shape.hidden_dec = 4;
    shape.decoder = kDecoders[v / 9];
    shape.head = kHeads[(v / 3) % 3];
    shape.split = kSplits[v % 3];
    GradCheckCase c = check(g, shape, LossConfig{}, 2, derive_seed(seed, stream::kInit, static_cast<std::uint64_t>(i)));
    if (suite.cases.empty() || c.report.max_rel_error > suite.max_rel_error) {
      suite.max_rel_error = c.report.max_rel_error;
      suite.worst = c.variant + " " + c.report.worst;
    }
    suite.cases.push_back(std::move(c));
  }
  return suite;
}

FeaturedGraph shrink_graph(const FeaturedGraph& g, NodeId max_nodes) {
  const NodeId n = g.node_count();
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return g.adjacency.degree(a) > g.adjacency.degree(b); });

  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> picked;
  for (NodeId root : order) {
    if (static_cast<NodeId>(picked.size()) >= max_nodes) break;
    if (seen[static_cast<std::size_t>(root)]) continue;
    std::deque<NodeId> queue{root};
    seen[static_cast<std::size_t>(root)] = 1;
    while (!queue.empty() && static_cast<NodeId>(picked.size()) < max_nodes) {
      const NodeId u = queue.front();
      queue.pop_front();
      picked.push_back(u);
      for (NodeId v : g.adjacency.neighbors(u))
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          queue.push_back(v);
        }
    }
  }
  std::sort(picked.begin(), picked.end());

  FeaturedGraph out;
  out.adjacency = induced_subgraph(g.adjacency, picked);
  out.features.resize(static_cast<Eigen::Index>(picked.size()), g.features.cols());
  for (std::size_t k = 0; k < picked.size(); ++k) out.features.row(static_cast<Eigen::Index>(k)) = g.features.row(picked[k]);
  return out;
}

GradCheckCase grad_check_config(const FeaturedGraph& g, const TrainConfig& cfg, NodeId max_nodes, int max_hidden) {
  FeaturedGraph small = shrink_graph(g, max_nodes);
  if (!usable(small.adjacency)) {
    throw std::runtime_error("gradient check: the shrunken graph has no edges or is complete");
  }
  if (cfg.renormalize_features) small.features = renormalize_rows(small.features);
  ModelShape shape = cfg.shape_for(small.feature_count());
  shape.hidden_enc = std::min(shape.hidden_enc, max_hidden);
  shape.hidden_dec = std::min(shape.hidden_dec, max_hidden);
  return check(small, shape, cfg.loss, std::min(cfg.k_samples, 2), cfg.seed, cfg.feature_target);
}

}  // namespace an2vec::cli
