#include "an2vec/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "an2vec/gradient.hpp"
#include "an2vec/linkpred.hpp"

namespace an2vec {

void ClassifierConfig::validate() const {
  if (!(l2_strength >= 0.0)) throw std::invalid_argument("l2 strength must be >= 0");
  if (max_iterations < 1) throw std::invalid_argument("max iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
}

namespace {

double logistic(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// Largest eigenvalue of [X 1]ᵀ[X 1] / n by power iteration, padded upwards.
double gram_spectral_bound(const DenseMatrix& x) {
  const Eigen::Index n = x.rows(), d = x.cols() + 1;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(d) / std::sqrt(static_cast<double>(d));
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd xv = x * v.head(d - 1);
    xv.array() += v(d - 1);
    Eigen::VectorXd w(d);
    w.head(d - 1) = x.transpose() * xv;
    w(d - 1) = xv.sum();
    w /= static_cast<double>(n);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Power iteration approaches from below; the Frobenius norm caps it.
  const double frob = (x.squaredNorm() + static_cast<double>(n)) / static_cast<double>(n);
  return std::min(frob, lambda * 1.05 + 1e-12);
}

}  // namespace

BinaryLogistic fit_binary_logistic(const DenseMatrix& x, std::span<const int> y01, const ClassifierConfig& cfg) {
  cfg.validate();
  require_shape(static_cast<std::size_t>(x.rows()) == y01.size(), "classifier: rows and labels differ in length");
  if (x.rows() == 0) throw std::invalid_argument("classifier: empty training set");
  const auto n = static_cast<double>(x.rows());
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = y01[static_cast<std::size_t>(i)] > 0 ? 1.0 : 0.0;

  const double lipschitz = gram_spectral_bound(x) / 4.0 + cfg.l2_strength / n;
  const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  BinaryLogistic m;
  m.weights = Vector::Zero(x.cols());
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Eigen::VectorXd z = x * m.weights;
    z.array() += m.intercept;
    Eigen::VectorXd r(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) r(i) = logistic(z(i)) - y(i);
    const Vector gw = (x.transpose() * r) / n + (cfg.l2_strength / n) * m.weights;
    const double gb = r.sum() / n;
    m.iterations = it;
    const double gmax = std::max(gw.size() ? gw.cwiseAbs().maxCoeff() : 0.0, std::abs(gb));
    if (gmax < cfg.tolerance) {
      m.converged = true;
      break;
    }
    m.weights -= step * gw;
    m.intercept -= step * gb;
  }
  return m;
}

void OneVsRestClassifier::fit(const DenseMatrix& x, std::span<const int> labels, const ClassifierConfig& cfg) {
  require_shape(static_cast<std::size_t>(x.rows()) == labels.size(), "classifier: rows and labels differ in length");
  std::set<int> seen(labels.begin(), labels.end());
  classes_.assign(seen.begin(), seen.end());
  models_.clear();
  std::vector<int> y(labels.size());
  for (int c : classes_) {
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == c ? 1 : 0;
    models_.push_back(fit_binary_logistic(x, y, cfg));
  }
}

std::vector<int> OneVsRestClassifier::predict(const DenseMatrix& x) const {
  if (classes_.empty()) throw std::logic_error("classifier has not been fitted");
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::size_t best = 0;
    double best_score = models_[0].decision(x.row(i));
    for (std::size_t c = 1; c < models_.size(); ++c) {
      const double s = models_[c].decision(x.row(i));
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    out[static_cast<std::size_t>(i)] = classes_[best];
  }
  return out;
}

double f1_micro(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("f1: truth and prediction differ in length");
  if (truth.empty()) throw std::invalid_argument("f1 of an empty set");
  // Pooled TP, FP and FN over classes; every miss is one FP and one FN.
  std::size_t tp = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) tp += truth[i] == predicted[i] ? 1 : 0;
  const std::size_t miss = truth.size() - tp;
  return 2.0 * static_cast<double>(tp) / (2.0 * static_cast<double>(tp) + 2.0 * static_cast<double>(miss));
}

NodeClassificationResult node_classification(const DenseMatrix& embeddings, std::span<const int> labels,
                                             std::span<const NodeId> train_nodes, std::span<const NodeId> test_nodes,
                                             const ClassifierConfig& cfg) {
  require_shape(static_cast<std::size_t>(embeddings.rows()) == labels.size(),
                "node classification: embedding rows and labels differ in length");
  std::set<NodeId> train_set(train_nodes.begin(), train_nodes.end());
  for (NodeId t : test_nodes)
    if (train_set.count(t)) throw std::invalid_argument("train and test node sets overlap");
  auto gather = [&](std::span<const NodeId> nodes, DenseMatrix& x, std::vector<int>& y) {
    x.resize(static_cast<Eigen::Index>(nodes.size()), embeddings.cols());
    y.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (nodes[k] < 0 || nodes[k] >= embeddings.rows()) throw std::out_of_range("node id out of range");
      x.row(static_cast<Eigen::Index>(k)) = embeddings.row(nodes[k]);
      y[k] = labels[static_cast<std::size_t>(nodes[k])];
    }
  };
  DenseMatrix x_train, x_test;
  std::vector<int> y_train, y_test;
  gather(train_nodes, x_train, y_train);
  gather(test_nodes, x_test, y_test);

  OneVsRestClassifier clf;
  clf.fit(x_train, y_train, cfg);
  NodeClassificationResult out;
  std::set<int> known(clf.classes().begin(), clf.classes().end());
  std::set<int> missing;
  for (int c : y_test)
    if (!known.count(c)) missing.insert(c);
  out.missing_classes.assign(missing.begin(), missing.end());
  out.f1 = f1_micro(y_test, clf.predict(x_test));
  return out;
}

NodeSplit split_nodes(NodeId n, double test_frac, std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) throw std::invalid_argument("node test fraction must lie in (0, 1)");
  const auto count = static_cast<std::size_t>(std::floor(test_frac * static_cast<double>(n) + 0.5));
  if (count == 0 || count >= static_cast<std::size_t>(n))
    throw std::invalid_argument("node split leaves an empty train or test set");
  std::vector<NodeId> ids(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  NodeSplit out;
  out.test_nodes.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count));
  out.train_nodes.assign(ids.begin() + static_cast<std::ptrdiff_t>(count), ids.end());
  std::sort(out.test_nodes.begin(), out.test_nodes.end());
  std::sort(out.train_nodes.begin(), out.train_nodes.end());
  return out;
}

NodeClassificationRun run_node_classification(const FeaturedGraph& graph, double test_frac, const TrainConfig& cfg,
                                              std::uint64_t split_seed, const ClassifierConfig& ccfg) {
  graph.validate();
  if (!graph.labels) throw std::invalid_argument("node classification needs labels");
  const NodeSplit split = split_nodes(graph.node_count(), test_frac, split_seed);
  const DenseMatrix x = cfg.renormalize_features ? renormalize_rows(graph.features) : graph.features;

  DenseMatrix x_sub(static_cast<Eigen::Index>(split.train_nodes.size()), x.cols());
  for (std::size_t k = 0; k < split.train_nodes.size(); ++k)
    x_sub.row(static_cast<Eigen::Index>(k)) = x.row(split.train_nodes[k]);
  const SparseAdjacency a_sub = induced_subgraph(graph.adjacency, split.train_nodes);

  TrainResult tr = train(training_inputs(a_sub, x_sub, cfg), cfg);
  const DenseMatrix mu = embed_mean(tr.weights, graph.adjacency, x);

  NodeClassificationRun out;
  out.result = node_classification(mu, *graph.labels, split.train_nodes, split.test_nodes, ccfg);
  out.trace = std::move(tr.trace);
  out.weights = std::move(tr.weights);
  return out;
}

}  // namespace an2vec
