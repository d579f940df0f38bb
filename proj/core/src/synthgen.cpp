#include "an2vec/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace an2vec {

void SbmConfig::validate() const {
  if (m < 1 || n < 1) throw std::invalid_argument("SBM needs m >= 1 and n >= 1");
  if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0)) {
    throw std::invalid_argument("SBM probabilities must satisfy 0 <= p_out <= p_in <= 1");
  }
}

void FeatureConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
}

void FeaturedGraph::validate() const {
  require_shape(features.rows() == adjacency.node_count(),
                "feature rows (" + std::to_string(features.rows()) + ") != node count (" +
                    std::to_string(adjacency.node_count()) + ")");
  if (labels) require_shape(labels->size() == static_cast<std::size_t>(node_count()), "label count != node count");
  if (community) {
    require_shape(community->size() == static_cast<std::size_t>(node_count()), "community count != node count");
  }
  if (!features.allFinite()) throw std::invalid_argument("features contain non-finite values");
}

SbmSample generate_sbm(const SbmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const NodeId total = cfg.node_count();
  SbmSample out;
  out.community.resize(static_cast<std::size_t>(total));
  for (NodeId i = 0; i < total; ++i) out.community[i] = i / cfg.n;

  std::vector<Edge> edges;
  for (NodeId i = 0; i < total; ++i) {
    for (NodeId j = i + 1; j < total; ++j) {
      const double p = out.community[i] == out.community[j] ? cfg.p_in : cfg.p_out;
      // Draw for every pair so the stream layout does not depend on p.
      if (unif(rng) < p) edges.push_back({i, j});
    }
  }
  out.adjacency = SparseAdjacency(total, std::move(edges));
  return out;
}

std::size_t shuffled_count(double alpha, std::size_t n_nodes) {
  return static_cast<std::size_t>(std::floor((1.0 - alpha) * static_cast<double>(n_nodes) + 0.5));
}

ColorAssignment assign_colors(const std::vector<int>& community, double alpha, Rng& rng) {
  ColorAssignment out;
  out.colors = community;
  const std::size_t n = community.size();
  const std::size_t k = shuffled_count(alpha, n);

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first k entries are a uniform sample without replacement.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  out.shuffled_nodes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.shuffled_nodes.begin(), out.shuffled_nodes.end());

  std::vector<int> moved;
  moved.reserve(k);
  for (NodeId v : out.shuffled_nodes) moved.push_back(community[v]);
  for (std::size_t i = moved.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(moved[i - 1], moved[pick(rng)]);
  }
  for (std::size_t i = 0; i < k; ++i) out.colors[out.shuffled_nodes[i]] = moved[i];
  return out;
}

DenseMatrix assign_features(const std::vector<int>& community, const FeatureConfig& fcfg, std::uint64_t seed) {
  fcfg.validate();
  if (community.empty()) return DenseMatrix(0, 0);
  const int n_colors = *std::max_element(community.begin(), community.end()) + 1;
  if (*std::min_element(community.begin(), community.end()) < 0) {
    throw std::invalid_argument("community ids must be nonnegative");
  }
  Rng rng(seed);
  const ColorAssignment colors = assign_colors(community, fcfg.alpha, rng);

  DenseMatrix x = DenseMatrix::Zero(static_cast<Eigen::Index>(community.size()), n_colors);
  for (std::size_t i = 0; i < community.size(); ++i) x(static_cast<Eigen::Index>(i), colors.colors[i]) = 1.0;
  if (fcfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, fcfg.noise_sigma);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) += noise(rng);
  }
  return x;
}

FeaturedGraph generate_featured_graph(const SbmConfig& cfg, const FeatureConfig& fcfg, std::uint64_t seed) {
  SbmSample sbm = generate_sbm(cfg, derive_seed(seed, stream::kData));
  FeaturedGraph g;
  g.features = assign_features(sbm.community, fcfg, derive_seed(seed, stream::kFeatures));
  g.adjacency = std::move(sbm.adjacency);
  g.labels = sbm.community;
  g.community = std::move(sbm.community);
  return g;
}

}  // namespace an2vec
