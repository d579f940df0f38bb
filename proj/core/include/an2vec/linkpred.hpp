#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "an2vec/graph.hpp"
#include "an2vec/metrics.hpp"
#include "an2vec/model.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

namespace an2vec {

/// Held-out positives (removed edges) and an equal number of non-edges.
struct EdgeSplit {
  SparseAdjacency train_adjacency;
  std::vector<Edge> test_pos;
  std::vector<Edge> test_neg;
};

/// Thrown when the graph has fewer non-edges than requested.
class InsufficientNonEdges : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Moves round(test_frac · |E|) uniformly chosen edges into test_pos and
/// samples as many distinct non-edges (no self-pairs) for test_neg.
EdgeSplit split_edges(const SparseAdjacency& a, double test_frac, std::uint64_t seed);

/// μ rows of the model evaluated on (adjacency, features).
DenseMatrix embed_mean(const ModelWeights& w, const SparseAdjacency& adjacency, const DenseMatrix& features);

/// Decoder probability for a single pair given embeddings ξ.
double pair_probability(const ModelWeights& w, const DenseMatrix& xi, NodeId i, NodeId j);

struct EdgeScores {
  std::vector<double> scores;  // test_pos first, then test_neg
  std::vector<int> labels;
};

/// Scores held-out pairs. The encoder runs on the training adjacency with the
/// full feature matrix. With use_mean the decoder sees ξ = μ; otherwise one
/// reparameterised sample drawn from `sample_seed`.
EdgeScores score_edges(const ModelWeights& w, const DenseMatrix& features, const EdgeSplit& split, bool use_mean = true,
                       std::uint64_t sample_seed = 0);

struct LinkPredictionResult {
  RankingResult metrics;
  TrainTrace trace;
  ModelWeights weights;
};

/// Split, train on the training adjacency, score the test pairs.
LinkPredictionResult run_link_prediction(const FeaturedGraph& graph, double test_frac, const TrainConfig& cfg,
                                         std::uint64_t split_seed);

}  // namespace an2vec
