#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "an2vec/common.hpp"
#include "an2vec/graph.hpp"

namespace an2vec {

/// Allocation of embedding dimensions. Columns [0, f_a) reconstruct the
/// adjacency only, [f_a, f_a + f_ax) are shared, and the last f_x
/// reconstruct features only.
struct DimensionSplit {
  int f_a = 0;
  int f_ax = 0;
  int f_x = 0;

  int total() const { return f_a + f_ax + f_x; }
  /// Width of the encoder heads before the overlap blocks are averaged.
  int encoder_width() const { return f_a + 2 * f_ax + f_x; }
  int adjacency_width() const { return f_a + f_ax; }
  int feature_width() const { return f_ax + f_x; }
  int feature_offset() const { return f_a; }

  void validate() const;
  friend bool operator==(const DimensionSplit&, const DimensionSplit&) = default;
};

enum class AdjacencyDecoder { deep, shallow };
enum class FeatureHead { multinomial, bernoulli, gaussian };

std::string_view to_string(AdjacencyDecoder d);
std::string_view to_string(FeatureHead h);
AdjacencyDecoder parse_adjacency_decoder(std::string_view s);
FeatureHead parse_feature_head(std::string_view s);

struct ModelShape {
  Eigen::Index n_features = 0;
  int hidden_enc = 50;
  int hidden_dec = 50;
  DimensionSplit split;
  AdjacencyDecoder decoder = AdjacencyDecoder::deep;
  FeatureHead head = FeatureHead::multinomial;

  void validate() const;
};

struct EncoderWeights {
  DenseMatrix w0;        // D × H_enc, shared first GC layer
  DenseMatrix w1_mu;     // H_enc × encoder_width
  DenseMatrix w1_sigma;  // H_enc × encoder_width
};

/// Decoder parameters θ. The shallow adjacency decoder has no weights, in
/// which case a0 and a1 are 0 × 0.
struct DecoderWeights {
  DenseMatrix a0;  // adjacency_width × H_dec
  DenseMatrix a1;  // H_dec × H_dec bilinear form
  DenseMatrix x0;  // feature_width × H_dec
  DenseMatrix x1;  // H_dec × D

  double squared_norm() const;
};

struct ModelWeights {
  ModelShape shape;
  EncoderWeights enc;
  DecoderWeights dec;

  std::size_t parameter_count() const;
  bool all_finite() const;
};

/// Exact trainable-parameter count for a shape.
std::size_t parameter_count(const ModelShape& shape);

/// All weight matrices of a model in a fixed order. Empty matrices (the
/// shallow decoder's) are skipped.
std::vector<DenseMatrix*> weight_matrices(EncoderWeights& enc, DecoderWeights& dec);
std::vector<const DenseMatrix*> weight_matrices(const EncoderWeights& enc, const DecoderWeights& dec);
std::vector<std::string> weight_names(const ModelShape& shape);

/// Zero-valued weights with the right shapes (used for gradients too).
ModelWeights zero_weights(const ModelShape& shape);

struct EncoderOutput {
  DenseMatrix hidden_pre;  // Â X W0
  DenseMatrix hidden;      // Â ReLU(Â X W0)
  DenseMatrix mu_raw;
  DenseMatrix log_sigma_raw;
};

/// Two graph-convolution layers with a shared first layer.
EncoderOutput encode(const DenseMatrix& x, const NormalizedAdjacency& a_hat, const EncoderWeights& w);
/// Same, with the constant product Â X supplied by the caller.
EncoderOutput encode_propagated(const DenseMatrix& ax, const NormalizedAdjacency& a_hat, const EncoderWeights& w);

struct EmbeddingDistribution {
  DenseMatrix mu;
  DenseMatrix log_sigma;
};

/// Averages the two shared blocks of a raw head output: width
/// f_a + 2 f_ax + f_x becomes f_a + f_ax + f_x.
DenseMatrix merge_overlap(const DenseMatrix& raw, const DimensionSplit& split);
EmbeddingDistribution merge_overlap(const DenseMatrix& mu_raw, const DenseMatrix& log_sigma_raw,
                                    const DimensionSplit& split);
/// Adjoint of merge_overlap: spreads a merged-width gradient onto the raw width.
DenseMatrix merge_overlap_adjoint(const DenseMatrix& merged_grad, const DimensionSplit& split);

struct EmbeddingSample {
  std::vector<DenseMatrix> xi;
  std::vector<DenseMatrix> eps;
};

std::vector<DenseMatrix> draw_standard_normal(Eigen::Index rows, Eigen::Index cols, int k, Rng& rng);
EmbeddingSample sample_embeddings(const EmbeddingDistribution& dist, int k, Rng& rng);
EmbeddingSample sample_embeddings(const EmbeddingDistribution& dist, std::vector<DenseMatrix> eps);

/// Column views selecting what each decoder consumes.
inline auto adjacency_part(const DenseMatrix& xi, const DimensionSplit& s) { return xi.leftCols(s.adjacency_width()); }
inline auto feature_part(const DenseMatrix& xi, const DimensionSplit& s) {
  return xi.middleCols(s.feature_offset(), s.feature_width());
}

DenseMatrix sigmoid(const DenseMatrix& z);
DenseMatrix relu(const DenseMatrix& z);
DenseMatrix row_softmax(const DenseMatrix& z);

/// γ W_{A,1} γᵀ with γ = ReLU(ξ W_{A,0}).
DenseMatrix adjacency_logits_deep(const DenseMatrix& xi_a, const DecoderWeights& w);
DenseMatrix decode_adjacency_deep(const DenseMatrix& xi_a, const DecoderWeights& w);
/// sigmoid(ξ ξᵀ).
DenseMatrix decode_adjacency_shallow(const DenseMatrix& xi_a);

/// ReLU(ξ W_{X,0}) W_{X,1}.
DenseMatrix feature_logits(const DenseMatrix& xi_x, const DecoderWeights& w);
/// Multinomial rows (softmax), Bernoulli probabilities (sigmoid) or Gaussian
/// means (identity), depending on the head.
DenseMatrix decode_features(const DenseMatrix& xi_x, const DecoderWeights& w, FeatureHead head);
DenseMatrix apply_feature_head(const DenseMatrix& logits, FeatureHead head);

}  // namespace an2vec
