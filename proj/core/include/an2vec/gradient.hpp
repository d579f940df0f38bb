#pragma once

#include <span>
#include <string>
#include <vector>

#include "an2vec/loss.hpp"
#include "an2vec/model.hpp"
#include "an2vec/synthgen.hpp"

namespace an2vec {

/// Everything about the data that stays fixed during training: A, Â, X,
/// the propagated features Â X, and the density d.
struct ModelInputs {
  SparseAdjacency adjacency;
  NormalizedAdjacency a_hat;
  DenseMatrix features;
  DenseMatrix propagated;  // Â X
  DenseMatrix target;      // reconstructed by the feature decoder; same shape as features
  double density = 0.0;

  static ModelInputs from(const SparseAdjacency& a, const DenseMatrix& x);
  static ModelInputs from(const SparseAdjacency& a, const DenseMatrix& x, const DenseMatrix& target);
  static ModelInputs from(const FeaturedGraph& g) { return from(g.adjacency, g.features); }

  NodeId node_count() const { return adjacency.node_count(); }
};

/// Intermediates of one reparameterised sample.
struct SampleState {
  DenseMatrix eps;
  DenseMatrix xi;
  DenseMatrix gamma_pre;  // ξ_A W_{A,0}   (deep decoder only)
  DenseMatrix gamma;      // ReLU(gamma_pre)
  DenseMatrix gamma_w;    // γ W_{A,1}
  DenseMatrix adj_logits;
  DenseMatrix feat_pre;   // ξ_X W_{X,0}
  DenseMatrix feat_hidden;
  DenseMatrix feat_logits;
  double l_a = 0.0;
  double l_x = 0.0;
};

/// Recorded forward pass; the input to backward().
struct ForwardState {
  EncoderOutput encoder;
  EmbeddingDistribution dist;
  DenseMatrix sigma;
  std::vector<SampleState> samples;
  LossBreakdown loss;
  bool has_intermediates = false;
};

struct GradientSet {
  EncoderWeights enc;
  DecoderWeights dec;

  std::vector<const DenseMatrix*> matrices() const { return weight_matrices(enc, dec); }
};

/// Runs the model with the given noise draws (one N × F matrix per sample).
/// With keep_intermediates = false only the loss is retained.
ForwardState forward(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                     const LossConfig& cfg, bool keep_intermediates = true);

/// Exact pathwise gradient of loss.total w.r.t. every weight, ε held fixed.
/// Throws std::logic_error if the state was recorded without intermediates.
GradientSet backward(const ForwardState& state, const ModelWeights& w, const ModelInputs& in, const LossConfig& cfg);

struct Evaluation {
  LossBreakdown loss;
  GradientSet grad;
};

/// Fused forward + backward that processes one sample at a time, so only
/// one N × N matrix is alive at once.
Evaluation loss_and_gradient(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                             const LossConfig& cfg);

LossBreakdown evaluate_loss(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                            const LossConfig& cfg);
/// Deterministic loss with ξ = μ.
LossBreakdown evaluate_loss_at_mean(const ModelWeights& w, const ModelInputs& in, const LossConfig& cfg);

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  double resolution = 0.0;  // denominator floor, see below
  std::string worst;        // "matrix[i,j]" of the worst coordinate
};

/// Compares backward() against central differences of the total loss.
/// Coordinates whose ±step perturbation changes any ReLU pattern or clamp
/// pattern are skipped. Relative error is
/// |g_a - g_n| / max(resolution, |g_a| + |g_n|), where
/// resolution = 1e6 · ε_machine · max(1, |L|) / step is the smallest
/// gradient magnitude central differences resolve to five digits.
FiniteDiffReport finite_diff_check(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                                   const LossConfig& cfg, double step = 1e-6);

}  // namespace an2vec
