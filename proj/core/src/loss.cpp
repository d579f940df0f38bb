#include "an2vec/loss.hpp"

#include <cmath>
#include <numbers>

namespace an2vec {

namespace {

using Array = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_density(double d) {
  if (!(d > 0.0 && d < 1.0)) {
    throw DegenerateGraphError("balanced adjacency loss needs 0 < density < 1, got " + std::to_string(d));
  }
}

// Σ over edge entries (both orientations) of f(i, j).
template <typename F>
double sum_over_edges(const SparseAdjacency& a, F&& f) {
  double s = 0.0;
  for (NodeId i = 0; i < a.node_count(); ++i)
    for (NodeId j : a.neighbors(i)) s += f(i, j);
  return s;
}

}  // namespace

void LossConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 0.5)) throw std::invalid_argument("clip_eps must lie in (0, 0.5)");
  if (!(kappa_kl > 0.0 && kappa_theta > 0.0)) throw std::invalid_argument("kappa values must be positive");
}

bool LossBreakdown::all_finite() const { return first_non_finite()[0] == '\0'; }

const char* LossBreakdown::first_non_finite() const {
  if (!std::isfinite(l_a_balanced)) return "adjacency";
  if (!std::isfinite(l_x)) return "features";
  if (!std::isfinite(l_kl)) return "kl";
  if (!std::isfinite(l_theta)) return "theta";
  if (!std::isfinite(total)) return "total";
  return "";
}

double adjacency_loss_balanced(const DenseMatrix& p, const SparseAdjacency& a, double d, const LossConfig& cfg) {
  const NodeId n = a.node_count();
  require_shape(p.rows() == n && p.cols() == n, "adjacency loss: probability matrix must be N × N");
  check_density(d);
  const double lo = cfg.clip_eps;
  const double hi = 1.0 - cfg.clip_eps;
  const Array pc = p.array().max(lo).min(hi);
  Array log_q = (1.0 - pc).log();
  if (!cfg.include_diagonal) log_q.matrix().diagonal().setZero();
  const double non_edge_all = log_q.sum();
  const double edge_q = sum_over_edges(a, [&](NodeId i, NodeId j) { return log_q(i, j); });
  const double edge_p = sum_over_edges(a, [&](NodeId i, NodeId j) { return std::log(pc(i, j)); });
  return -0.5 * (edge_p / d + (non_edge_all - edge_q) / (1.0 - d));
}

double adjacency_loss_balanced(std::span<const DenseMatrix> p, const SparseAdjacency& a, double d,
                               const LossConfig& cfg) {
  if (p.empty()) throw std::invalid_argument("adjacency loss: no samples");
  double s = 0.0;
  for (const auto& pk : p) s += adjacency_loss_balanced(pk, a, d, cfg);
  return s / static_cast<double>(p.size());
}

double feature_loss(const DenseMatrix& px, const DenseMatrix& x, FeatureHead head, double clip_eps) {
  require_shape(px.rows() == x.rows() && px.cols() == x.cols(), "feature loss: parameter and target shapes differ");
  switch (head) {
    case FeatureHead::multinomial: {
      const Array lp = px.array().max(clip_eps).min(1.0 - clip_eps).log();
      return -(x.array() * lp).sum();
    }
    case FeatureHead::bernoulli: {
      const Array pc = px.array().max(clip_eps).min(1.0 - clip_eps);
      return -(x.array() * pc.log() + (1.0 - x.array()) * (1.0 - pc).log()).sum();
    }
    case FeatureHead::gaussian:
      return 0.5 * (x - px).squaredNorm();
  }
  throw std::invalid_argument("unknown feature head");
}

double feature_loss(std::span<const DenseMatrix> px, const DenseMatrix& x, FeatureHead head, double clip_eps) {
  if (px.empty()) throw std::invalid_argument("feature loss: no samples");
  double s = 0.0;
  for (const auto& p : px) s += feature_loss(p, x, head, clip_eps);
  return s / static_cast<double>(px.size());
}

double kl_loss(const DenseMatrix& mu, const DenseMatrix& log_sigma) {
  require_shape(mu.rows() == log_sigma.rows() && mu.cols() == log_sigma.cols(), "kl: mu and log sigma shapes differ");
  return 0.5 * (mu.array().square() + (2.0 * log_sigma.array()).exp() - 2.0 * log_sigma.array() - 1.0).sum();
}

double kl_loss(const EmbeddingDistribution& dist) { return kl_loss(dist.mu, dist.log_sigma); }

double theta_loss(const DecoderWeights& w, double kappa_theta) { return w.squared_norm() / (2.0 * kappa_theta); }

LossBreakdown total_loss(const LossParts& parts, Eigen::Index n_nodes, Eigen::Index n_features, int embedding_dim,
                         const LossConfig& cfg) {
  if (n_nodes < 1 || n_features < 2 || embedding_dim < 1) {
    throw std::invalid_argument("total_loss needs N >= 1, D >= 2 and F >= 1");
  }
  const double n = static_cast<double>(n_nodes);
  LossBreakdown b;
  b.l_a_balanced = parts.l_a_balanced;
  b.l_x = parts.l_x;
  b.l_kl = parts.l_kl;
  b.l_theta = parts.l_theta;
  b.l_a_scaled = parts.l_a_balanced / (n * n * std::numbers::ln2);
  b.l_x_scaled = parts.l_x / (n * std::log(static_cast<double>(n_features)));
  b.l_kl_scaled = parts.l_kl / (n * embedding_dim * cfg.kappa_kl);
  b.l_theta_scaled = parts.l_theta;
  b.total = b.l_a_scaled + b.l_x_scaled + b.l_kl_scaled + b.l_theta_scaled;
  return b;
}

double adjacency_loss_from_logits(const DenseMatrix& z, const SparseAdjacency& a, double d, const LossConfig& cfg,
                                  DenseMatrix* d_logits, double grad_scale) {
  const NodeId n = a.node_count();
  require_shape(z.rows() == n && z.cols() == n, "adjacency loss: logits must be N × N");
  check_density(d);
  const double lo = cfg.clip_eps;
  const double hi = 1.0 - cfg.clip_eps;
  const double w_edge = 1.0 / d;
  const double w_non = 1.0 / (1.0 - d);

  // p = σ(z), q = 1 - p = σ(-z), both computed without cancellation.
  const Array e = (-z.array().abs()).exp();
  const Array inv = 1.0 / (1.0 + e);
  const Array p = (z.array() >= 0.0).select(inv, e * inv);
  const Array q = (z.array() >= 0.0).select(e * inv, inv);
  const Array pc = p.max(lo).min(hi);
  const Array qc = q.max(lo).min(hi);
  Array log_q = qc.log();
  if (!cfg.include_diagonal) log_q.matrix().diagonal().setZero();

  const double non_edge_all = log_q.sum();
  const double edge_q = sum_over_edges(a, [&](NodeId i, NodeId j) { return log_q(i, j); });
  const double edge_p = sum_over_edges(a, [&](NodeId i, NodeId j) { return std::log(pc(i, j)); });
  const double value = -0.5 * (w_edge * edge_p + w_non * (non_edge_all - edge_q));

  if (d_logits) {
    const auto unclipped = (p >= lo && p <= hi).cast<double>();
    // Non-edge entries: ∂/∂z [-½ w_non ln(1 - p)] = ½ w_non p.
    *d_logits = ((0.5 * w_non * grad_scale) * p * unclipped).matrix();
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j : a.neighbors(i)) {
        // Edge entries: ∂/∂z [-½ w_edge ln p] = -½ w_edge (1 - p).
        (*d_logits)(i, j) = (p(i, j) >= lo && p(i, j) <= hi) ? -0.5 * w_edge * grad_scale * q(i, j) : 0.0;
      }
    }
    if (!cfg.include_diagonal) d_logits->diagonal().setZero();
  }
  return value;
}

double feature_loss_from_logits(const DenseMatrix& logits, const DenseMatrix& x, FeatureHead head, double clip_eps,
                                DenseMatrix* d_logits, double grad_scale) {
  require_shape(logits.rows() == x.rows() && logits.cols() == x.cols(), "feature loss: logits and target shapes differ");
  const double lo = clip_eps;
  const double hi = 1.0 - clip_eps;
  switch (head) {
    case FeatureHead::multinomial: {
      Array log_p(logits.rows(), logits.cols());
      for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
        log_p.row(i) = logits.row(i).array() - lse;
      }
      const Array p = log_p.exp();
      const Array log_pc = log_p.max(std::log(lo)).min(std::log1p(-clip_eps));
      const double value = -(x.array() * log_pc).sum();
      if (d_logits) {
        const Array xu = x.array() * (p >= lo && p <= hi).cast<double>();
        const Eigen::VectorXd row_mass = xu.rowwise().sum().matrix();
        Array g = p.colwise() * row_mass.array() - xu;
        *d_logits = (grad_scale * g).matrix();
      }
      return value;
    }
    case FeatureHead::bernoulli: {
      const Array e = (-logits.array().abs()).exp();
      const Array inv = 1.0 / (1.0 + e);
      const Array p = (logits.array() >= 0.0).select(inv, e * inv);
      const Array q = (logits.array() >= 0.0).select(e * inv, inv);
      const Array pc = p.max(lo).min(hi);
      const Array qc = q.max(lo).min(hi);
      const double value = -(x.array() * pc.log() + (1.0 - x.array()) * qc.log()).sum();
      if (d_logits) *d_logits = (grad_scale * (p - x.array()) * (p >= lo && p <= hi).cast<double>()).matrix();
      return value;
    }
    case FeatureHead::gaussian: {
      const double value = 0.5 * (x - logits).squaredNorm();
      if (d_logits) *d_logits = grad_scale * (logits - x);
      return value;
    }
  }
  throw std::invalid_argument("unknown feature head");
}

}  // namespace an2vec
