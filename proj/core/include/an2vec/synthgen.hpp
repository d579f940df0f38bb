#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "an2vec/common.hpp"
#include "an2vec/graph.hpp"

namespace an2vec {

/// Planted-partition block model: m communities of n nodes each.
struct SbmConfig {
  int m = 100;
  int n = 10;
  double p_in = 0.25;
  double p_out = 0.01;

  void validate() const;
  NodeId node_count() const { return static_cast<NodeId>(m) * n; }
};

/// Colour assignment. alpha is the fraction of nodes keeping their
/// community colour; the other 1 - alpha get shuffled among themselves.
struct FeatureConfig {
  double alpha = 1.0;
  double noise_sigma = 0.1;

  void validate() const;
};

/// Graph plus node attributes; the common input record for training and
/// evaluation.
struct FeaturedGraph {
  SparseAdjacency adjacency;
  DenseMatrix features;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<int>> community;

  NodeId node_count() const { return adjacency.node_count(); }
  Eigen::Index feature_count() const { return features.cols(); }
  void validate() const;
};

struct SbmSample {
  SparseAdjacency adjacency;
  std::vector<int> community;
};

SbmSample generate_sbm(const SbmConfig& cfg, std::uint64_t seed);

struct ColorAssignment {
  std::vector<int> colors;
  std::vector<NodeId> shuffled_nodes;  // sorted
};

/// Number of nodes whose colours get shuffled: round-half-up of (1 - alpha) N.
std::size_t shuffled_count(double alpha, std::size_t n_nodes);

/// Pre-noise colours: community colour for everybody, then a uniformly random
/// subset of shuffled_count() nodes has its colours permuted.
ColorAssignment assign_colors(const std::vector<int>& community, double alpha, Rng& rng);

/// One-hot of the shuffled colours plus i.i.d. N(0, noise_sigma²) noise.
DenseMatrix assign_features(const std::vector<int>& community, const FeatureConfig& fcfg, std::uint64_t seed);

/// SBM structure plus correlated colour features. Labels are the community ids.
FeaturedGraph generate_featured_graph(const SbmConfig& cfg, const FeatureConfig& fcfg, std::uint64_t seed);

}  // namespace an2vec
