#include "an2vec/model.hpp"

#include <cmath>

namespace an2vec {

void DimensionSplit::validate() const {
  if (f_a < 0 || f_ax < 0 || f_x < 0) throw std::invalid_argument("dimension split entries must be >= 0");
  if (adjacency_width() < 1) throw std::invalid_argument("adjacency decoder needs at least one dimension");
  if (feature_width() < 1) throw std::invalid_argument("feature decoder needs at least one dimension");
}

std::string_view to_string(AdjacencyDecoder d) { return d == AdjacencyDecoder::deep ? "deep" : "shallow"; }

std::string_view to_string(FeatureHead h) {
  switch (h) {
    case FeatureHead::multinomial: return "multinomial";
    case FeatureHead::bernoulli: return "bernoulli";
    case FeatureHead::gaussian: return "gaussian";
  }
  return "?";
}

AdjacencyDecoder parse_adjacency_decoder(std::string_view s) {
  if (s == "deep") return AdjacencyDecoder::deep;
  if (s == "shallow") return AdjacencyDecoder::shallow;
  throw std::invalid_argument("unknown adjacency decoder '" + std::string(s) + "'");
}

FeatureHead parse_feature_head(std::string_view s) {
  if (s == "multinomial") return FeatureHead::multinomial;
  if (s == "bernoulli") return FeatureHead::bernoulli;
  if (s == "gaussian") return FeatureHead::gaussian;
  throw std::invalid_argument("unknown feature head '" + std::string(s) + "'");
}

void ModelShape::validate() const {
  split.validate();
  if (n_features < 1) throw std::invalid_argument("model needs at least one feature column");
  if (hidden_enc < 1 || hidden_dec < 1) throw std::invalid_argument("hidden widths must be >= 1");
}

double DecoderWeights::squared_norm() const {
  return a0.squaredNorm() + a1.squaredNorm() + x0.squaredNorm() + x1.squaredNorm();
}

std::size_t parameter_count(const ModelShape& s) {
  const auto d = static_cast<std::size_t>(s.n_features);
  const auto he = static_cast<std::size_t>(s.hidden_enc);
  const auto hd = static_cast<std::size_t>(s.hidden_dec);
  const auto head = static_cast<std::size_t>(s.split.encoder_width());
  std::size_t count = d * he + 2 * he * head;
  if (s.decoder == AdjacencyDecoder::deep) {
    count += static_cast<std::size_t>(s.split.adjacency_width()) * hd + hd * hd;
  }
  count += static_cast<std::size_t>(s.split.feature_width()) * hd + hd * d;
  return count;
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t count = 0;
  for (const auto* m : weight_matrices(enc, dec)) count += static_cast<std::size_t>(m->size());
  return count;
}

bool ModelWeights::all_finite() const {
  for (const auto* m : weight_matrices(enc, dec))
    if (!m->allFinite()) return false;
  return true;
}

std::vector<DenseMatrix*> weight_matrices(EncoderWeights& enc, DecoderWeights& dec) {
  std::vector<DenseMatrix*> out{&enc.w0, &enc.w1_mu, &enc.w1_sigma};
  for (DenseMatrix* m : {&dec.a0, &dec.a1, &dec.x0, &dec.x1})
    if (m->size() > 0) out.push_back(m);
  return out;
}

std::vector<const DenseMatrix*> weight_matrices(const EncoderWeights& enc, const DecoderWeights& dec) {
  std::vector<const DenseMatrix*> out{&enc.w0, &enc.w1_mu, &enc.w1_sigma};
  for (const DenseMatrix* m : {&dec.a0, &dec.a1, &dec.x0, &dec.x1})
    if (m->size() > 0) out.push_back(m);
  return out;
}

std::vector<std::string> weight_names(const ModelShape& shape) {
  std::vector<std::string> names{"enc.w0", "enc.w1_mu", "enc.w1_sigma"};
  if (shape.decoder == AdjacencyDecoder::deep) {
    names.emplace_back("dec.a0");
    names.emplace_back("dec.a1");
  }
  names.emplace_back("dec.x0");
  names.emplace_back("dec.x1");
  return names;
}

ModelWeights zero_weights(const ModelShape& shape) {
  shape.validate();
  ModelWeights w;
  w.shape = shape;
  const int head = shape.split.encoder_width();
  w.enc.w0 = DenseMatrix::Zero(shape.n_features, shape.hidden_enc);
  w.enc.w1_mu = DenseMatrix::Zero(shape.hidden_enc, head);
  w.enc.w1_sigma = DenseMatrix::Zero(shape.hidden_enc, head);
  if (shape.decoder == AdjacencyDecoder::deep) {
    w.dec.a0 = DenseMatrix::Zero(shape.split.adjacency_width(), shape.hidden_dec);
    w.dec.a1 = DenseMatrix::Zero(shape.hidden_dec, shape.hidden_dec);
  }
  w.dec.x0 = DenseMatrix::Zero(shape.split.feature_width(), shape.hidden_dec);
  w.dec.x1 = DenseMatrix::Zero(shape.hidden_dec, shape.n_features);
  return w;
}

DenseMatrix relu(const DenseMatrix& z) { return z.cwiseMax(0.0); }

DenseMatrix sigmoid(const DenseMatrix& z) {
  // exp of a nonpositive argument only, so nothing overflows.
  const auto e = (-z.array().abs()).exp();
  return (z.array() >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e)).matrix();
}

DenseMatrix row_softmax(const DenseMatrix& z) {
  DenseMatrix out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    auto e = (z.row(i).array() - mx).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

EncoderOutput encode_propagated(const DenseMatrix& ax, const NormalizedAdjacency& a_hat, const EncoderWeights& w) {
  require_shape(ax.rows() == a_hat.node_count(), "encode: feature rows != node count");
  require_shape(ax.cols() == w.w0.rows(), "encode: feature width != W0 rows");
  require_shape(w.w1_mu.rows() == w.w0.cols() && w.w1_sigma.rows() == w.w0.cols(), "encode: W1 rows != hidden width");
  require_shape(w.w1_mu.cols() == w.w1_sigma.cols(), "encode: mu and sigma heads differ in width");
  EncoderOutput out;
  out.hidden_pre.noalias() = ax * w.w0;
  out.hidden = spmm(a_hat, relu(out.hidden_pre));
  out.mu_raw.noalias() = out.hidden * w.w1_mu;
  out.log_sigma_raw.noalias() = out.hidden * w.w1_sigma;
  return out;
}

EncoderOutput encode(const DenseMatrix& x, const NormalizedAdjacency& a_hat, const EncoderWeights& w) {
  require_shape(x.rows() == a_hat.node_count(), "encode: feature rows != node count");
  return encode_propagated(spmm(a_hat, x), a_hat, w);
}

DenseMatrix merge_overlap(const DenseMatrix& raw, const DimensionSplit& s) {
  require_shape(raw.cols() == s.encoder_width(), "merge_overlap: raw width " + std::to_string(raw.cols()) +
                                                     " != " + std::to_string(s.encoder_width()));
  DenseMatrix out(raw.rows(), s.total());
  out.leftCols(s.f_a) = raw.leftCols(s.f_a);
  out.middleCols(s.f_a, s.f_ax) = 0.5 * (raw.middleCols(s.f_a, s.f_ax) + raw.middleCols(s.f_a + s.f_ax, s.f_ax));
  out.rightCols(s.f_x) = raw.rightCols(s.f_x);
  return out;
}

EmbeddingDistribution merge_overlap(const DenseMatrix& mu_raw, const DenseMatrix& log_sigma_raw,
                                    const DimensionSplit& split) {
  require_shape(mu_raw.rows() == log_sigma_raw.rows(), "merge_overlap: mu and log sigma row counts differ");
  return {merge_overlap(mu_raw, split), merge_overlap(log_sigma_raw, split)};
}

DenseMatrix merge_overlap_adjoint(const DenseMatrix& g, const DimensionSplit& s) {
  require_shape(g.cols() == s.total(), "merge_overlap_adjoint: width mismatch");
  DenseMatrix out(g.rows(), s.encoder_width());
  out.leftCols(s.f_a) = g.leftCols(s.f_a);
  out.middleCols(s.f_a, s.f_ax) = 0.5 * g.middleCols(s.f_a, s.f_ax);
  out.middleCols(s.f_a + s.f_ax, s.f_ax) = 0.5 * g.middleCols(s.f_a, s.f_ax);
  out.rightCols(s.f_x) = g.rightCols(s.f_x);
  return out;
}

std::vector<DenseMatrix> draw_standard_normal(Eigen::Index rows, Eigen::Index cols, int k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DenseMatrix> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s) {
    DenseMatrix e(rows, cols);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = normal(rng);
    out.push_back(std::move(e));
  }
  return out;
}

EmbeddingSample sample_embeddings(const EmbeddingDistribution& dist, std::vector<DenseMatrix> eps) {
  require_shape(dist.mu.rows() == dist.log_sigma.rows() && dist.mu.cols() == dist.log_sigma.cols(),
                "sample_embeddings: mu and log sigma shapes differ");
  EmbeddingSample out;
  const DenseMatrix sigma = dist.log_sigma.array().exp().matrix();
  for (const auto& e : eps) {
    require_shape(e.rows() == dist.mu.rows() && e.cols() == dist.mu.cols(), "sample_embeddings: noise shape");
    out.xi.push_back(dist.mu + sigma.cwiseProduct(e));
  }
  out.eps = std::move(eps);
  return out;
}

EmbeddingSample sample_embeddings(const EmbeddingDistribution& dist, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample_embeddings: k must be >= 1");
  return sample_embeddings(dist, draw_standard_normal(dist.mu.rows(), dist.mu.cols(), k, rng));
}

DenseMatrix adjacency_logits_deep(const DenseMatrix& xi_a, const DecoderWeights& w) {
  require_shape(xi_a.cols() == w.a0.rows(), "deep decoder: embedding width != W_A0 rows");
  require_shape(w.a1.rows() == w.a0.cols() && w.a1.cols() == w.a0.cols(), "deep decoder: W_A1 must be H × H");
  const DenseMatrix gamma = relu(xi_a * w.a0);
  const DenseMatrix gw = gamma * w.a1;
  return gw * gamma.transpose();
}

DenseMatrix decode_adjacency_deep(const DenseMatrix& xi_a, const DecoderWeights& w) {
  return sigmoid(adjacency_logits_deep(xi_a, w));
}

DenseMatrix decode_adjacency_shallow(const DenseMatrix& xi_a) { return sigmoid(xi_a * xi_a.transpose()); }

DenseMatrix feature_logits(const DenseMatrix& xi_x, const DecoderWeights& w) {
  require_shape(xi_x.cols() == w.x0.rows(), "feature decoder: embedding width != W_X0 rows");
  require_shape(w.x1.rows() == w.x0.cols(), "feature decoder: W_X1 rows != hidden width");
  return relu(xi_x * w.x0) * w.x1;
}

DenseMatrix apply_feature_head(const DenseMatrix& logits, FeatureHead head) {
  switch (head) {
    case FeatureHead::multinomial: return row_softmax(logits);
    case FeatureHead::bernoulli: return sigmoid(logits);
    case FeatureHead::gaussian: return logits;
  }
  throw std::invalid_argument("unknown feature head");
}

DenseMatrix decode_features(const DenseMatrix& xi_x, const DecoderWeights& w, FeatureHead head) {
  return apply_feature_head(feature_logits(xi_x, w), head);
}

}  // namespace an2vec
