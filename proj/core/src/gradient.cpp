#include "an2vec/gradient.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace an2vec {

namespace {

struct Scales {
  double adjacency;  // 1 / (K N² ln 2)
  double features;   // 1 / (K N ln D)
  double kl;         // 1 / (N F κ_KL)
};

Scales loss_scales(const ModelWeights& w, const ModelInputs& in, std::size_t k, const LossConfig& cfg) {
  const double n = static_cast<double>(in.node_count());
  const double kk = static_cast<double>(k);
  return {1.0 / (kk * n * n * std::numbers::ln2),
          1.0 / (kk * n * std::log(static_cast<double>(w.shape.n_features))),
          1.0 / (n * w.shape.split.total() * cfg.kappa_kl)};
}

void check_inputs(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps) {
  w.shape.validate();
  require_shape(in.features.cols() == w.shape.n_features,
                "model expects " + std::to_string(w.shape.n_features) + " feature columns, data has " +
                    std::to_string(in.features.cols()));
  require_shape(in.features.rows() == in.node_count(), "feature rows != node count");
  require_shape(in.target.rows() == in.features.rows() && in.target.cols() == in.features.cols(),
                "feature target must match the feature shape");
  if (w.shape.n_features < 2) throw std::invalid_argument("feature loss normaliser ln D needs D >= 2");
  if (eps.empty()) throw std::invalid_argument("need at least one noise sample");
  for (const auto& e : eps) {
    require_shape(e.rows() == in.node_count() && e.cols() == w.shape.split.total(), "noise sample must be N × F");
  }
}

// Forward pass of one sample. If the gradient pointers are non-null they
// receive the scaled loss gradients w.r.t. the decoder logits.
SampleState forward_sample(const ModelWeights& w, const ModelInputs& in, const EmbeddingDistribution& dist,
                           const DenseMatrix& sigma, const DenseMatrix& eps, const LossConfig& cfg,
                           const Scales& sc, DenseMatrix* d_adj, DenseMatrix* d_feat) {
  const auto& split = w.shape.split;
  SampleState s;
  s.eps = eps;
  s.xi = dist.mu + sigma.cwiseProduct(eps);
  const DenseMatrix xa = adjacency_part(s.xi, split);
  const DenseMatrix xx = feature_part(s.xi, split);

  if (w.shape.decoder == AdjacencyDecoder::deep) {
    s.gamma_pre.noalias() = xa * w.dec.a0;
    s.gamma = relu(s.gamma_pre);
    s.gamma_w.noalias() = s.gamma * w.dec.a1;
    s.adj_logits.noalias() = s.gamma_w * s.gamma.transpose();
  } else {
    s.adj_logits.noalias() = xa * xa.transpose();
  }
  s.feat_pre.noalias() = xx * w.dec.x0;
  s.feat_hidden = relu(s.feat_pre);
  s.feat_logits.noalias() = s.feat_hidden * w.dec.x1;

  s.l_a = adjacency_loss_from_logits(s.adj_logits, in.adjacency, in.density, cfg, d_adj, sc.adjacency);
  s.l_x = feature_loss_from_logits(s.feat_logits, in.target, w.shape.head, cfg.clip_eps, d_feat, sc.features);
  return s;
}

// Accumulates decoder gradients and ∂L/∂μ, ∂L/∂log σ for one sample.
void backward_sample(const SampleState& s, const ModelWeights& w, const DenseMatrix& sigma, const DenseMatrix& d_adj,
                     const DenseMatrix& d_feat, GradientSet& g, DenseMatrix& d_mu, DenseMatrix& d_log_sigma) {
  const auto& split = w.shape.split;
  DenseMatrix d_xi = DenseMatrix::Zero(s.xi.rows(), s.xi.cols());

  if (w.shape.decoder == AdjacencyDecoder::deep) {
    const DenseMatrix dz_gamma = d_adj * s.gamma;
    g.dec.a1.noalias() += s.gamma.transpose() * dz_gamma;
    DenseMatrix d_gamma = dz_gamma * w.dec.a1.transpose();
    d_gamma.noalias() += d_adj.transpose() * s.gamma_w;
    const DenseMatrix d_gamma_pre = d_gamma.cwiseProduct((s.gamma_pre.array() > 0.0).cast<double>().matrix());
    const DenseMatrix xa = adjacency_part(s.xi, split);
    g.dec.a0.noalias() += xa.transpose() * d_gamma_pre;
    d_xi.leftCols(split.adjacency_width()).noalias() += d_gamma_pre * w.dec.a0.transpose();
  } else {
    const DenseMatrix xa = adjacency_part(s.xi, split);
    DenseMatrix d_xa = d_adj * xa;
    d_xa.noalias() += d_adj.transpose() * xa;
    d_xi.leftCols(split.adjacency_width()) += d_xa;
  }

  g.dec.x1.noalias() += s.feat_hidden.transpose() * d_feat;
  const DenseMatrix d_hidden =
      (d_feat * w.dec.x1.transpose()).cwiseProduct((s.feat_pre.array() > 0.0).cast<double>().matrix());
  const DenseMatrix xx = feature_part(s.xi, split);
  g.dec.x0.noalias() += xx.transpose() * d_hidden;
  d_xi.middleCols(split.feature_offset(), split.feature_width()).noalias() += d_hidden * w.dec.x0.transpose();

  d_mu += d_xi;
  d_log_sigma += d_xi.cwiseProduct(sigma).cwiseProduct(s.eps);
}

GradientSet zero_gradients(const ModelWeights& w) {
  ModelWeights z = zero_weights(w.shape);
  return {std::move(z.enc), std::move(z.dec)};
}

// KL, merge adjoint, encoder layers and the θ prior.
void finish_backward(const ForwardState& st, const ModelWeights& w, const ModelInputs& in, const LossConfig& cfg,
                     const Scales& sc, DenseMatrix d_mu, DenseMatrix d_log_sigma, GradientSet& g) {
  d_mu += sc.kl * st.dist.mu;
  d_log_sigma += sc.kl * (st.sigma.array().square() - 1.0).matrix();

  const DenseMatrix d_mu_raw = merge_overlap_adjoint(d_mu, w.shape.split);
  const DenseMatrix d_ls_raw = merge_overlap_adjoint(d_log_sigma, w.shape.split);
  g.enc.w1_mu.noalias() = st.encoder.hidden.transpose() * d_mu_raw;
  g.enc.w1_sigma.noalias() = st.encoder.hidden.transpose() * d_ls_raw;
  DenseMatrix d_hidden = d_mu_raw * w.enc.w1_mu.transpose();
  d_hidden.noalias() += d_ls_raw * w.enc.w1_sigma.transpose();
  // Â is symmetric, so Âᵀ d_hidden = Â d_hidden.
  const DenseMatrix d_relu = spmm(in.a_hat, d_hidden);
  const DenseMatrix d_pre = d_relu.cwiseProduct((st.encoder.hidden_pre.array() > 0.0).cast<double>().matrix());
  g.enc.w0.noalias() = in.propagated.transpose() * d_pre;

  const double inv_kappa = 1.0 / cfg.kappa_theta;
  if (w.dec.a0.size() > 0) {
    g.dec.a0 += inv_kappa * w.dec.a0;
    g.dec.a1 += inv_kappa * w.dec.a1;
  }
  g.dec.x0 += inv_kappa * w.dec.x0;
  g.dec.x1 += inv_kappa * w.dec.x1;
}

ForwardState encode_state(const ModelWeights& w, const ModelInputs& in) {
  ForwardState st;
  st.encoder = encode_propagated(in.propagated, in.a_hat, w.enc);
  st.dist = merge_overlap(st.encoder.mu_raw, st.encoder.log_sigma_raw, w.shape.split);
  st.sigma = st.dist.log_sigma.array().exp().matrix();
  return st;
}

LossBreakdown assemble(const ModelWeights& w, const ModelInputs& in, double l_a_sum, double l_x_sum, std::size_t k,
                       const ForwardState& st, const LossConfig& cfg) {
  LossParts parts;
  parts.l_a_balanced = l_a_sum / static_cast<double>(k);
  parts.l_x = l_x_sum / static_cast<double>(k);
  parts.l_kl = kl_loss(st.dist);
  parts.l_theta = theta_loss(w.dec, cfg.kappa_theta);
  return total_loss(parts, in.node_count(), w.shape.n_features, w.shape.split.total(), cfg);
}

}  // namespace

ModelInputs ModelInputs::from(const SparseAdjacency& a, const DenseMatrix& x) { return from(a, x, x); }

ModelInputs ModelInputs::from(const SparseAdjacency& a, const DenseMatrix& x, const DenseMatrix& target) {
  require_shape(x.rows() == a.node_count(), "feature rows != node count");
  require_shape(target.rows() == x.rows() && target.cols() == x.cols(), "feature target must match the feature shape");
  ModelInputs in;
  in.adjacency = a;
  in.a_hat = normalize_adjacency(a);
  in.features = x;
  in.propagated = spmm(in.a_hat, x);
  in.target = target;
  in.density = an2vec::density(a);
  return in;
}

ForwardState forward(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                     const LossConfig& cfg, bool keep_intermediates) {
  check_inputs(w, in, eps);
  ForwardState st = encode_state(w, in);
  const Scales sc = loss_scales(w, in, eps.size(), cfg);
  double l_a = 0.0, l_x = 0.0;
  for (const auto& e : eps) {
    SampleState s = forward_sample(w, in, st.dist, st.sigma, e, cfg, sc, nullptr, nullptr);
    l_a += s.l_a;
    l_x += s.l_x;
    if (keep_intermediates) st.samples.push_back(std::move(s));
  }
  st.loss = assemble(w, in, l_a, l_x, eps.size(), st, cfg);
  st.has_intermediates = keep_intermediates;
  return st;
}

GradientSet backward(const ForwardState& st, const ModelWeights& w, const ModelInputs& in, const LossConfig& cfg) {
  if (!st.has_intermediates || st.samples.empty()) {
    throw std::logic_error("backward: forward state was recorded without intermediates");
  }
  const Scales sc = loss_scales(w, in, st.samples.size(), cfg);
  GradientSet g = zero_gradients(w);
  DenseMatrix d_mu = DenseMatrix::Zero(st.dist.mu.rows(), st.dist.mu.cols());
  DenseMatrix d_ls = DenseMatrix::Zero(d_mu.rows(), d_mu.cols());
  for (const auto& s : st.samples) {
    DenseMatrix d_adj, d_feat;
    adjacency_loss_from_logits(s.adj_logits, in.adjacency, in.density, cfg, &d_adj, sc.adjacency);
    feature_loss_from_logits(s.feat_logits, in.target, w.shape.head, cfg.clip_eps, &d_feat, sc.features);
    backward_sample(s, w, st.sigma, d_adj, d_feat, g, d_mu, d_ls);
  }
  finish_backward(st, w, in, cfg, sc, std::move(d_mu), std::move(d_ls), g);
  return g;
}

Evaluation loss_and_gradient(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                             const LossConfig& cfg) {
  check_inputs(w, in, eps);
  ForwardState st = encode_state(w, in);
  const Scales sc = loss_scales(w, in, eps.size(), cfg);
  GradientSet g = zero_gradients(w);
  DenseMatrix d_mu = DenseMatrix::Zero(st.dist.mu.rows(), st.dist.mu.cols());
  DenseMatrix d_ls = DenseMatrix::Zero(d_mu.rows(), d_mu.cols());
  double l_a = 0.0, l_x = 0.0;
  for (const auto& e : eps) {
    DenseMatrix d_adj, d_feat;
    const SampleState s = forward_sample(w, in, st.dist, st.sigma, e, cfg, sc, &d_adj, &d_feat);
    l_a += s.l_a;
    l_x += s.l_x;
    backward_sample(s, w, st.sigma, d_adj, d_feat, g, d_mu, d_ls);
  }
  st.loss = assemble(w, in, l_a, l_x, eps.size(), st, cfg);
  finish_backward(st, w, in, cfg, sc, std::move(d_mu), std::move(d_ls), g);
  return {st.loss, std::move(g)};
}

LossBreakdown evaluate_loss(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                            const LossConfig& cfg) {
  return forward(w, in, eps, cfg, false).loss;
}

LossBreakdown evaluate_loss_at_mean(const ModelWeights& w, const ModelInputs& in, const LossConfig& cfg) {
  const DenseMatrix zero = DenseMatrix::Zero(in.node_count(), w.shape.split.total());
  return evaluate_loss(w, in, std::span<const DenseMatrix>(&zero, 1), cfg);
}

namespace {

// ReLU activation patterns and clamp patterns of a recorded pass.
std::vector<bool> activation_signature(const ForwardState& st, const ModelWeights& w, const LossConfig& cfg) {
  std::vector<bool> sig;
  auto push_positive = [&](const DenseMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) sig.push_back(m.data()[i] > 0.0);
  };
  auto push_clamped = [&](const DenseMatrix& p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double v = p.data()[i];
      sig.push_back(v >= cfg.clip_eps && v <= 1.0 - cfg.clip_eps);
    }
  };
  push_positive(st.encoder.hidden_pre);
  for (const auto& s : st.samples) {
    push_positive(s.gamma_pre);
    push_positive(s.feat_pre);
    push_clamped(sigmoid(s.adj_logits));
    if (w.shape.head != FeatureHead::gaussian) push_clamped(apply_feature_head(s.feat_logits, w.shape.head));
  }
  return sig;
}

}  // namespace

FiniteDiffReport finite_diff_check(const ModelWeights& w, const ModelInputs& in, std::span<const DenseMatrix> eps,
                                   const LossConfig& cfg, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  const ForwardState base = forward(w, in, eps, cfg, true);
  const GradientSet analytic = backward(base, w, in, cfg);
  const std::vector<bool> base_sig = activation_signature(base, w, cfg);

  FiniteDiffReport report;
  report.resolution =
      1e6 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(base.loss.total)) / step;
  ModelWeights probe = w;
  auto probe_mats = weight_matrices(probe.enc, probe.dec);
  const auto grad_mats = analytic.matrices();
  const auto names = weight_names(w.shape);

  for (std::size_t m = 0; m < probe_mats.size(); ++m) {
    DenseMatrix& mat = *probe_mats[m];
    for (Eigen::Index idx = 0; idx < mat.size(); ++idx) {
      const double orig = mat.data()[idx];
      mat.data()[idx] = orig + step;
      const ForwardState plus = forward(probe, in, eps, cfg, true);
      mat.data()[idx] = orig - step;
      const ForwardState minus = forward(probe, in, eps, cfg, true);
      mat.data()[idx] = orig;

      if (activation_signature(plus, probe, cfg) != base_sig || activation_signature(minus, probe, cfg) != base_sig) {
        ++report.skipped_kinks;
        continue;
      }
      const double numeric = (plus.loss.total - minus.loss.total) / (2.0 * step);
      const double ga = grad_mats[m]->data()[idx];
      const double err = std::abs(ga - numeric) / std::max(report.resolution, std::abs(ga) + std::abs(numeric));
      ++report.checked;
      if (report.worst.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        const Eigen::Index r = idx / mat.cols(), c = idx % mat.cols();
        report.worst = names[m] + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
      }
    }
  }
  return report;
}

}  // namespace an2vec
