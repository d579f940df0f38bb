#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "an2vec/gradient.hpp"
#include "an2vec/loss.hpp"
#include "an2vec/model.hpp"
#include "an2vec/synthgen.hpp"

namespace an2vec {

/// What the feature decoder reconstructs. The encoder always sees the
/// features as given.
enum class FeatureTarget {
  as_is,    // the feature rows themselves
  one_hot,  // one-hot of each row's largest entry (single-draw categorical rows)
};

std::string_view to_string(FeatureTarget t);
FeatureTarget parse_feature_target(std::string_view s);

struct TrainConfig {
  int epochs = 1000;
  int k_samples = 5;
  double lr = 0.01;
  std::uint64_t seed = 0;
  LossConfig loss;
  DimensionSplit split{5, 0, 5};
  int hidden_enc = 50;
  int hidden_dec = 50;
  AdjacencyDecoder decoder = AdjacencyDecoder::deep;
  FeatureHead head = FeatureHead::multinomial;
  /// Draw fresh ε every epoch. When false the epoch-1 draws are reused.
  bool resample_noise = true;
  /// Also record the deterministic loss at ξ = μ for every epoch.
  bool track_mean_loss = true;
  /// Rescale each feature row to sum to one before training (multinomial
  /// targets). Off by default: noisy one-hot rows are used as they are.
  bool renormalize_features = false;
  FeatureTarget feature_target = FeatureTarget::as_is;

  void validate() const;
  ModelShape shape_for(Eigen::Index n_features) const;
};

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;  // K-sample estimate at the weights entering this epoch
  double total_at_mean = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  double best_total = 0.0;
  int best_epoch = 0;

  /// Minimum over epochs of a loss component.
  double best_of(double LossBreakdown::*component) const;
  double best_total_at_mean() const;
};

struct TrainResult {
  ModelWeights weights;
  TrainTrace trace;
};

/// Thrown when a loss component becomes non-finite. Carries the trace up to
/// (not including) the failing epoch.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::string component, TrainTrace partial);
  int epoch() const { return epoch_; }
  const std::string& component() const { return component_; }
  const TrainTrace& partial_trace() const { return trace_; }

 private:
  int epoch_;
  std::string component_;
  TrainTrace trace_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Full-batch training with Adam. Deterministic in (data, cfg).
TrainResult train(const ModelInputs& in, const TrainConfig& cfg, const EpochCallback& on_epoch = {});
TrainResult train(const FeaturedGraph& graph, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Rows rescaled to unit sum (rows with nonpositive sums are left alone).
DenseMatrix renormalize_rows(const DenseMatrix& x);

/// One-hot of each row's largest entry; ties go to the lowest column.
DenseMatrix one_hot_rows(const DenseMatrix& x);

/// Inputs for training on adjacency `a` with encoder features `x`, with the
/// feature target chosen by cfg.feature_target.
ModelInputs training_inputs(const SparseAdjacency& a, const DenseMatrix& x, const TrainConfig& cfg);

}  // namespace an2vec
