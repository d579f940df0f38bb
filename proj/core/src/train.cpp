#include "an2vec/train.hpp"

#include <algorithm>
#include <limits>

#include "an2vec/optim.hpp"

namespace an2vec {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (k_samples < 1) throw std::invalid_argument("K must be >= 1");
  if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  loss.validate();
  split.validate();
  if (feature_target == FeatureTarget::one_hot && head == FeatureHead::gaussian)
    throw std::invalid_argument("one-hot feature targets need a multinomial or bernoulli head");
}

std::string_view to_string(FeatureTarget t) { return t == FeatureTarget::one_hot ? "one_hot" : "as_is"; }

FeatureTarget parse_feature_target(std::string_view s) {
  if (s == "as_is") return FeatureTarget::as_is;
  if (s == "one_hot") return FeatureTarget::one_hot;
  throw std::invalid_argument("feature target must be as_is or one_hot, got '" + std::string(s) + "'");
}

ModelShape TrainConfig::shape_for(Eigen::Index n_features) const {
  ModelShape s;
  s.n_features = n_features;
  s.hidden_enc = hidden_enc;
  s.hidden_dec = hidden_dec;
  s.split = split;
  s.decoder = decoder;
  s.head = head;
  s.validate();
  return s;
}

double TrainTrace::best_of(double LossBreakdown::*component) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : epochs) best = std::min(best, e.loss.*component);
  return best;
}

double TrainTrace::best_total_at_mean() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : epochs) best = std::min(best, e.total_at_mean);
  return best;
}

TrainingDiverged::TrainingDiverged(int epoch, std::string component, TrainTrace partial)
    : std::runtime_error("non-finite " + component + " loss at epoch " + std::to_string(epoch)),
      epoch_(epoch),
      component_(std::move(component)),
      trace_(std::move(partial)) {}

DenseMatrix renormalize_rows(const DenseMatrix& x) {
  DenseMatrix out = x;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s > 0.0) out.row(i) /= s;
  }
  return out;
}

DenseMatrix one_hot_rows(const DenseMatrix& x) {
  DenseMatrix out = DenseMatrix::Zero(x.rows(), x.cols());
  if (x.cols() == 0) return out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    x.row(i).maxCoeff(&best);
    out(i, best) = 1.0;
  }
  return out;
}

ModelInputs training_inputs(const SparseAdjacency& a, const DenseMatrix& x, const TrainConfig& cfg) {
  if (cfg.feature_target == FeatureTarget::one_hot) return ModelInputs::from(a, x, one_hot_rows(x));
  return ModelInputs::from(a, x);
}

TrainResult train(const ModelInputs& in, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const ModelShape shape = cfg.shape_for(in.features.cols());
  Rng init_rng(derive_seed(cfg.seed, stream::kInit));
  Rng noise_rng(derive_seed(cfg.seed, stream::kNoise));

  TrainResult out;
  out.weights = init_weights(shape, init_rng);
  auto params = weight_matrices(out.weights.enc, out.weights.dec);
  std::vector<const DenseMatrix*> const_params(params.begin(), params.end());
  AdamState adam = AdamState::for_params(const_params, cfg.lr);

  const Eigen::Index n = in.node_count();
  const int f = shape.split.total();
  std::vector<DenseMatrix> eps;
  out.trace.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
  out.trace.best_total = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.resample_noise || eps.empty()) eps = draw_standard_normal(n, f, cfg.k_samples, noise_rng);
    Evaluation ev = loss_and_gradient(out.weights, in, eps, cfg.loss);
    if (!ev.loss.all_finite()) throw TrainingDiverged(epoch, ev.loss.first_non_finite(), out.trace);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = ev.loss;
    rec.total_at_mean = cfg.track_mean_loss ? evaluate_loss_at_mean(out.weights, in, cfg.loss).total
                                            : std::numeric_limits<double>::quiet_NaN();
    if (rec.loss.total < out.trace.best_total) {
      out.trace.best_total = rec.loss.total;
      out.trace.best_epoch = epoch;
    }
    out.trace.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const auto grads = ev.grad.matrices();
    adam_step(params, grads, adam);
  }
  return out;
}

TrainResult train(const FeaturedGraph& graph, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  graph.validate();
  const DenseMatrix x = cfg.renormalize_features ? renormalize_rows(graph.features) : graph.features;
  return train(training_inputs(graph.adjacency, x, cfg), cfg, on_epoch);
}

}  // namespace an2vec
