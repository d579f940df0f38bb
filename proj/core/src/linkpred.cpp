#include "an2vec/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "an2vec/gradient.hpp"

namespace an2vec {

EdgeSplit split_edges(const SparseAdjacency& a, double test_frac, std::uint64_t seed) {
  if (!(test_frac >= 0.0 && test_frac < 1.0)) throw std::invalid_argument("test_frac must lie in [0, 1)");
  const auto& edges = a.edges();
  const auto count = static_cast<std::size_t>(std::floor(test_frac * static_cast<double>(edges.size()) + 0.5));
  const std::uint64_t n = static_cast<std::uint64_t>(a.node_count());
  const std::uint64_t all_pairs = n * (n > 0 ? n - 1 : 0) / 2;
  const std::uint64_t available = all_pairs - edges.size();
  if (count > available) {
    throw InsufficientNonEdges("requested " + std::to_string(count) + " non-edges but the graph has only " +
                               std::to_string(available));
  }

  Rng rng(seed);
  EdgeSplit out;
  std::vector<std::size_t> idx(edges.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<bool> removed(edges.size(), false);
  for (std::size_t i = 0; i < count; ++i) {
    removed[idx[i]] = true;
    out.test_pos.push_back(edges[idx[i]]);
  }
  std::vector<Edge> kept;
  kept.reserve(edges.size() - count);
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (!removed[i]) kept.push_back(edges[i]);
  out.train_adjacency = SparseAdjacency(a.node_count(), std::move(kept));

  if (count * 2 <= available) {
    // Rejection sampling of unordered pairs.
    std::set<Edge> chosen;
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    while (out.test_neg.size() < count) {
      NodeId i = node(rng), j = node(rng);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      if (a.has_edge(i, j) || !chosen.insert({i, j}).second) continue;
      out.test_neg.push_back({i, j});
    }
  } else {
    // Dense graph: enumerate the complement and sample from it.
    std::vector<Edge> complement;
    for (NodeId i = 0; i < static_cast<NodeId>(n); ++i)
      for (NodeId j = i + 1; j < static_cast<NodeId>(n); ++j)
        if (!a.has_edge(i, j)) complement.push_back({i, j});
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, complement.size() - 1);
      std::swap(complement[i], complement[pick(rng)]);
      out.test_neg.push_back(complement[i]);
    }
  }
  return out;
}

DenseMatrix embed_mean(const ModelWeights& w, const SparseAdjacency& adjacency, const DenseMatrix& features) {
  require_shape(features.cols() == w.shape.n_features, "embed: feature width does not match the model");
  const NormalizedAdjacency a_hat = normalize_adjacency(adjacency);
  const EncoderOutput enc = encode(features, a_hat, w.enc);
  return merge_overlap(enc.mu_raw, w.shape.split);
}

double pair_probability(const ModelWeights& w, const DenseMatrix& xi, NodeId i, NodeId j) {
  const auto& split = w.shape.split;
  const auto xa = adjacency_part(xi, split);
  double z = 0.0;
  if (w.shape.decoder == AdjacencyDecoder::deep) {
    const Eigen::RowVectorXd gi = (xa.row(i) * w.dec.a0).cwiseMax(0.0);
    const Eigen::RowVectorXd gj = (xa.row(j) * w.dec.a0).cwiseMax(0.0);
    z = (gi * w.dec.a1).dot(gj);
  } else {
    z = xa.row(i).dot(xa.row(j));
  }
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

EdgeScores score_edges(const ModelWeights& w, const DenseMatrix& features, const EdgeSplit& split, bool use_mean,
                       std::uint64_t sample_seed) {
  const NormalizedAdjacency a_hat = normalize_adjacency(split.train_adjacency);
  const EncoderOutput enc = encode(features, a_hat, w.enc);
  const EmbeddingDistribution dist = merge_overlap(enc.mu_raw, enc.log_sigma_raw, w.shape.split);
  DenseMatrix xi = dist.mu;
  if (!use_mean) {
    Rng rng(sample_seed);
    xi = sample_embeddings(dist, 1, rng).xi.front();
  }
  EdgeScores out;
  out.scores.reserve(split.test_pos.size() + split.test_neg.size());
  for (const auto& e : split.test_pos) {
    out.scores.push_back(pair_probability(w, xi, e.u, e.v));
    out.labels.push_back(1);
  }
  for (const auto& e : split.test_neg) {
    out.scores.push_back(pair_probability(w, xi, e.u, e.v));
    out.labels.push_back(0);
  }
  return out;
}

LinkPredictionResult run_link_prediction(const FeaturedGraph& graph, double test_frac, const TrainConfig& cfg,
                                         std::uint64_t split_seed) {
  graph.validate();
  const EdgeSplit split = split_edges(graph.adjacency, test_frac, split_seed);
  const DenseMatrix x = cfg.renormalize_features ? renormalize_rows(graph.features) : graph.features;
  TrainResult tr = train(training_inputs(split.train_adjacency, x, cfg), cfg);
  const EdgeScores sc = score_edges(tr.weights, x, split);
  LinkPredictionResult out;
  out.metrics = rank_metrics(sc.scores, sc.labels);
  out.trace = std::move(tr.trace);
  out.weights = std::move(tr.weights);
  return out;
}

}  // namespace an2vec
