#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "an2vec/common.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

namespace an2vec {

struct ClassifierConfig {
  double l2_strength = 1.0;
  int max_iterations = 1000;
  double tolerance = 1e-6;

  void validate() const;
};

/// Binary L2-regularised logistic regression with an unpenalised intercept.
/// Objective: mean log-loss + l2/(2n) ‖w‖².
struct BinaryLogistic {
  Vector weights;
  double intercept = 0.0;
  int iterations = 0;
  bool converged = false;

  double decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return x.dot(weights) + intercept; }
};

/// Full-batch gradient descent with step 1/L, L an upper bound on the
/// gradient's Lipschitz constant. Stops when ‖∇‖∞ < tolerance.
BinaryLogistic fit_binary_logistic(const DenseMatrix& x, std::span<const int> y01, const ClassifierConfig& cfg);

/// One binary model per class seen in training; predictions are the argmax
/// of decision values.
class OneVsRestClassifier {
 public:
  void fit(const DenseMatrix& x, std::span<const int> labels, const ClassifierConfig& cfg);
  std::vector<int> predict(const DenseMatrix& x) const;
  const std::vector<int>& classes() const { return classes_; }

 private:
  std::vector<int> classes_;
  std::vector<BinaryLogistic> models_;
};

/// Pooled over classes. For single-label prediction this equals accuracy.
double f1_micro(std::span<const int> truth, std::span<const int> predicted);

struct NodeClassificationResult {
  double f1 = 0.0;
  std::vector<int> missing_classes;  // occur among test labels but not in training
};

NodeClassificationResult node_classification(const DenseMatrix& embeddings, std::span<const int> labels,
                                             std::span<const NodeId> train_nodes, std::span<const NodeId> test_nodes,
                                             const ClassifierConfig& cfg = {});

struct NodeSplit {
  std::vector<NodeId> train_nodes;  // sorted
  std::vector<NodeId> test_nodes;   // sorted
};

/// Moves round(test_frac · N) uniformly chosen nodes into the test set.
NodeSplit split_nodes(NodeId n, double test_frac, std::uint64_t seed);

struct NodeClassificationRun {
  NodeClassificationResult result;
  TrainTrace trace;
  ModelWeights weights;
};

/// Trains on the subgraph induced by the training nodes, encodes the full
/// graph, and classifies the held-out nodes from their μ rows.
NodeClassificationRun run_node_classification(const FeaturedGraph& graph, double test_frac, const TrainConfig& cfg,
                                              std::uint64_t split_seed, const ClassifierConfig& ccfg = {});

}  // namespace an2vec
