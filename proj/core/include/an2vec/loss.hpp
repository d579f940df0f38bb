#pragma once

#include <span>

#include "an2vec/common.hpp"
#include "an2vec/graph.hpp"
#include "an2vec/model.hpp"

namespace an2vec {

struct LossConfig {
  double kappa_kl = 1000.0;
  double kappa_theta = 500.0;
  /// Probabilities are clamped into [clip_eps, 1 - clip_eps] before logs.
  double clip_eps = 1e-7;
  /// Sum the adjacency loss over i == j pairs as well (A_ii = 0).
  bool include_diagonal = true;

  void validate() const;
};

/// Raw component values and their rescaled versions:
///   total = l_a / (N² ln 2) + l_x / (N ln D) + l_kl / (N F κ_KL) + ‖θ‖² / (2 κ_θ)
struct LossBreakdown {
  double l_a_balanced = 0.0;
  double l_x = 0.0;
  double l_kl = 0.0;
  double l_theta = 0.0;  // already ‖θ‖² / (2 κ_θ)
  double l_a_scaled = 0.0;
  double l_x_scaled = 0.0;
  double l_kl_scaled = 0.0;
  double l_theta_scaled = 0.0;
  double total = 0.0;

  bool all_finite() const;
  /// Name of the first non-finite component, or "" if all are finite.
  const char* first_non_finite() const;
};

struct LossParts {
  double l_a_balanced = 0.0;
  double l_x = 0.0;
  double l_kl = 0.0;
  double l_theta = 0.0;
};

/// Balanced cross-entropy of one probability matrix against A; d is the
/// density of A. Throws DegenerateGraphError for d ∈ {0, 1}.
double adjacency_loss_balanced(const DenseMatrix& p, const SparseAdjacency& a, double d, const LossConfig& cfg = {});
/// K-sample average.
double adjacency_loss_balanced(std::span<const DenseMatrix> p, const SparseAdjacency& a, double d,
                               const LossConfig& cfg = {});

/// Negative log-likelihood of X under the decoded parameters.
double feature_loss(const DenseMatrix& px, const DenseMatrix& x, FeatureHead head, double clip_eps = 1e-7);
double feature_loss(std::span<const DenseMatrix> px, const DenseMatrix& x, FeatureHead head, double clip_eps = 1e-7);

/// ½ Σ μ² + σ² − 2 ln σ − 1.
double kl_loss(const DenseMatrix& mu, const DenseMatrix& log_sigma);
double kl_loss(const EmbeddingDistribution& dist);

/// ‖θ‖² / (2 κ_θ), constants dropped.
double theta_loss(const DecoderWeights& w, double kappa_theta);

LossBreakdown total_loss(const LossParts& parts, Eigen::Index n_nodes, Eigen::Index n_features, int embedding_dim,
                         const LossConfig& cfg);

// Logit-space kernels used by training. Each returns the (unaveraged) loss
// value and, if `d_logits` is non-null, writes grad_scale · ∂loss/∂logits.
// Clamped entries get zero gradient.
double adjacency_loss_from_logits(const DenseMatrix& z, const SparseAdjacency& a, double d, const LossConfig& cfg,
                                  DenseMatrix* d_logits = nullptr, double grad_scale = 1.0);
double feature_loss_from_logits(const DenseMatrix& logits, const DenseMatrix& x, FeatureHead head, double clip_eps,
                                DenseMatrix* d_logits = nullptr, double grad_scale = 1.0);

}  // namespace an2vec
