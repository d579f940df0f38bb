#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "an2vec/gradient.hpp"
#include "an2vec/optim.hpp"
#include "oracles.hpp"

using namespace an2vec;

namespace {

struct Instance {
  SparseAdjacency a;
  DenseMatrix x;
  ModelWeights w;
  std::vector<DenseMatrix> eps;
  DenseMatrix target;  // feature reconstruction target
};

DenseMatrix one_hot_features(int n, int d, std::mt19937_64& rng) {
  DenseMatrix x = DenseMatrix::Zero(n, d);
  for (int i = 0; i < n; ++i) x(i, static_cast<Eigen::Index>(rng() % static_cast<unsigned>(d))) = 1.0;
  return x;
}

Instance make_instance(int n, int d, DimensionSplit split, AdjacencyDecoder dec, FeatureHead head, int k,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance inst{oracle::random_graph(n, 0.4, rng), one_hot_features(n, d, rng), {}, {}};
  while (inst.a.edge_count() == 0) inst.a = oracle::random_graph(n, 0.4, rng);
  if (head == FeatureHead::gaussian) inst.x += 0.3 * oracle::random_matrix(n, d, rng);
  inst.target = inst.x;
  ModelShape shape;
  shape.n_features = d;
  shape.hidden_enc = 6;
  shape.hidden_dec = 5;
  shape.split = split;
  shape.decoder = dec;
  shape.head = head;
  Rng init(seed + 1);
  inst.w = init_weights(shape, init);
  for (int s = 0; s < k; ++s) inst.eps.push_back(oracle::random_matrix(n, split.total(), rng));
  return inst;
}

// log σ(z) and log(1 − σ(z)) with p clamped into [e, 1 − e]. Clamping p is
// clamping z into [logit e, logit(1 − e)]; the log1p forms keep full
// precision where σ(z) is close to 1.
double log_sigmoid_clipped(double z, double e) {
  const double lim = std::log(e / (1.0 - e));
  z = std::min(std::max(z, lim), -lim);
  return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}
double log_one_minus_sigmoid_clipped(double z, double e) { return log_sigmoid_clipped(-z, e); }

// Naive total loss straight from the model definition.
double oracle_total(const Instance& s, const LossConfig& cfg) {
  const auto& sh = s.w.shape;
  const auto& sp = sh.split;
  const Eigen::Index n = s.x.rows(), d = s.x.cols();
  const int f = sp.total();
  const DenseMatrix ad = oracle::dense_adjacency(s.a);
  const DenseMatrix ah = oracle::normalized(ad);

  DenseMatrix h1 = oracle::matmul(oracle::matmul(ah, s.x), s.w.enc.w0);
  for (Eigen::Index i = 0; i < h1.size(); ++i) h1.data()[i] = std::max(0.0, h1.data()[i]);
  const DenseMatrix h = oracle::matmul(ah, h1);
  const DenseMatrix mu_raw = oracle::matmul(h, s.w.enc.w1_mu);
  const DenseMatrix ls_raw = oracle::matmul(h, s.w.enc.w1_sigma);

  DenseMatrix mu(n, f), ls(n, f);
  for (Eigen::Index i = 0; i < n; ++i) {
    int c = 0;
    for (int j = 0; j < sp.f_a; ++j, ++c) mu(i, c) = mu_raw(i, j), ls(i, c) = ls_raw(i, j);
    for (int j = 0; j < sp.f_ax; ++j, ++c) {
      mu(i, c) = 0.5 * (mu_raw(i, sp.f_a + j) + mu_raw(i, sp.f_a + sp.f_ax + j));
      ls(i, c) = 0.5 * (ls_raw(i, sp.f_a + j) + ls_raw(i, sp.f_a + sp.f_ax + j));
    }
    for (int j = 0; j < sp.f_x; ++j, ++c) {
      mu(i, c) = mu_raw(i, sp.f_a + 2 * sp.f_ax + j);
      ls(i, c) = ls_raw(i, sp.f_a + 2 * sp.f_ax + j);
    }
  }

  double edges = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) edges += ad(i, j);
  const double dens = edges / static_cast<double>(n * n);

  double la = 0.0, lx = 0.0;
  const int fa = sp.f_a + sp.f_ax, fx = sp.f_ax + sp.f_x;
  for (const auto& e : s.eps) {
    DenseMatrix xi(n, f);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int j = 0; j < f; ++j) xi(i, j) = mu(i, j) + std::exp(ls(i, j)) * e(i, j);
    const DenseMatrix xa = xi.leftCols(fa);
    const DenseMatrix xx = xi.middleCols(sp.f_a, fx);

    DenseMatrix z;
    if (sh.decoder == AdjacencyDecoder::deep) {
      DenseMatrix g = oracle::matmul(xa, s.w.dec.a0);
      for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = std::max(0.0, g.data()[i]);
      z = oracle::matmul(oracle::matmul(g, s.w.dec.a1), g.transpose());
    } else {
      z = oracle::matmul(xa, xa.transpose());
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!cfg.include_diagonal && i == j) continue;
        la -= 0.5 * (ad(i, j) / dens * log_sigmoid_clipped(z(i, j), cfg.clip_eps) +
                     (1.0 - ad(i, j)) / (1.0 - dens) * log_one_minus_sigmoid_clipped(z(i, j), cfg.clip_eps));
      }

    DenseMatrix hx = oracle::matmul(xx, s.w.dec.x0);
    for (Eigen::Index i = 0; i < hx.size(); ++i) hx.data()[i] = std::max(0.0, hx.data()[i]);
    const DenseMatrix q = oracle::matmul(hx, s.w.dec.x1);
    for (Eigen::Index i = 0; i < n; ++i) {
      double mx = q(i, 0);
      for (Eigen::Index j = 1; j < d; ++j) mx = std::max(mx, q(i, j));
      double zs = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) zs += std::exp(q(i, j) - mx);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double xv = s.target(i, j);
        switch (sh.head) {
          case FeatureHead::multinomial: {
            const double lp = q(i, j) - mx - std::log(zs);
            lx -= xv * std::min(std::max(lp, std::log(cfg.clip_eps)), std::log1p(-cfg.clip_eps));
            break;
          }
          case FeatureHead::bernoulli:
            lx -= xv * log_sigmoid_clipped(q(i, j), cfg.clip_eps) +
                  (1.0 - xv) * log_one_minus_sigmoid_clipped(q(i, j), cfg.clip_eps);
            break;
          case FeatureHead::gaussian:
            lx += 0.5 * (xv - q(i, j)) * (xv - q(i, j));
            break;
        }
      }
    }
  }
  const double k = static_cast<double>(s.eps.size());
  la /= k;
  lx /= k;

  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < f; ++j) kl += 0.5 * (mu(i, j) * mu(i, j) + std::exp(2 * ls(i, j)) - 2 * ls(i, j) - 1);

  double th = 0.0;
  for (const DenseMatrix* m : {&s.w.dec.a0, &s.w.dec.a1, &s.w.dec.x0, &s.w.dec.x1})
    for (Eigen::Index i = 0; i < m->size(); ++i) th += m->data()[i] * m->data()[i];

  const double nn = static_cast<double>(n);
  return la / (nn * nn * std::log(2.0)) + lx / (nn * std::log(static_cast<double>(d))) +
         kl / (nn * f * cfg.kappa_kl) + th / (2.0 * cfg.kappa_theta);
}

struct Variant {
  DimensionSplit split;
  AdjacencyDecoder dec;
  FeatureHead head;
};

std::vector<Variant> variants() {
  std::vector<Variant> v;
  for (auto split : {DimensionSplit{3, 0, 3}, DimensionSplit{2, 2, 2}, DimensionSplit{0, 4, 0}})
    for (auto dec : {AdjacencyDecoder::deep, AdjacencyDecoder::shallow})
      for (auto head : {FeatureHead::multinomial, FeatureHead::bernoulli, FeatureHead::gaussian})
        v.push_back({split, dec, head});
  return v;
}

}  // namespace

TEST(Forward, MatchesNaiveOracleForEveryVariant) {
  const LossConfig cfg;
  std::uint64_t seed = 100;
  for (const auto& v : variants()) {
    const auto s = make_instance(7, 4, v.split, v.dec, v.head, 3, ++seed);
    const auto in = ModelInputs::from(s.a, s.x);
    const double got = evaluate_loss(s.w, in, s.eps, cfg).total;
    const double want = oracle_total(s, cfg);
    EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want)))
        << to_string(v.dec) << "/" << to_string(v.head) << " " << v.split.f_a << v.split.f_ax << v.split.f_x;
  }
}

TEST(Forward, DiagonalExclusionMatchesOracle) {
  LossConfig cfg;
  cfg.include_diagonal = false;
  const auto s = make_instance(6, 3, {2, 1, 2}, AdjacencyDecoder::deep, FeatureHead::multinomial, 2, 9);
  const auto in = ModelInputs::from(s.a, s.x);
  EXPECT_NEAR(evaluate_loss(s.w, in, s.eps, cfg).total, oracle_total(s, cfg), 1e-12);
}

TEST(Backward, AgreesWithCentralDifferencesOfTheOracle) {
  const LossConfig cfg;
  std::uint64_t seed = 500;
  for (const auto& v : variants()) {
    auto s = make_instance(6, 4, v.split, v.dec, v.head, 2, ++seed);
    const auto in = ModelInputs::from(s.a, s.x);
    const auto ev = loss_and_gradient(s.w, in, s.eps, cfg);
    auto params = weight_matrices(s.w.enc, s.w.dec);
    const auto grads = ev.grad.matrices();
    ASSERT_EQ(params.size(), grads.size());
    const double h = 1e-5;
    for (std::size_t m = 0; m < params.size(); ++m) {
      for (Eigen::Index idx = 0; idx < params[m]->size(); ++idx) {
        double& p = params[m]->data()[idx];
        const double orig = p;
        p = orig + h;
        const double up = oracle_total(s, cfg);
        p = orig - h;
        const double down = oracle_total(s, cfg);
        p = orig;
        const double numeric = (up - down) / (2 * h);
        const double analytic = grads[m]->data()[idx];
        // Absolute floor covers central-difference roundoff and rare kinks.
        EXPECT_NEAR(analytic, numeric, 1e-6 * std::max(std::abs(numeric), 1e-2))
            << to_string(v.dec) << "/" << to_string(v.head) << " matrix " << m << " entry " << idx;
      }
    }
  }
}

// Encoder input is a noisy copy of the one-hot rows, the target stays one-hot.
Instance with_noisy_input(Instance s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  s.x = s.target + 0.2 * oracle::random_matrix(static_cast<int>(s.x.rows()), static_cast<int>(s.x.cols()), rng);
  return s;
}

TEST(Forward, SeparateTargetMatchesOracle) {
  const LossConfig cfg;
  std::uint64_t seed = 300;
  for (const auto head : {FeatureHead::multinomial, FeatureHead::bernoulli}) {
    for (const auto dec : {AdjacencyDecoder::deep, AdjacencyDecoder::shallow}) {
      const auto s = with_noisy_input(make_instance(7, 4, {2, 1, 2}, dec, head, 2, ++seed), seed);
      const double got = evaluate_loss(s.w, ModelInputs::from(s.a, s.x, s.target), s.eps, cfg).total;
      const double want = oracle_total(s, cfg);
      EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want))) << to_string(dec) << "/" << to_string(head);
      EXPECT_GT(std::abs(got - evaluate_loss(s.w, ModelInputs::from(s.a, s.x), s.eps, cfg).total), 1e-6);
    }
  }
}

TEST(Backward, SeparateTargetAgreesWithCentralDifferencesOfTheOracle) {
  const LossConfig cfg;
  auto s = with_noisy_input(make_instance(6, 4, {1, 2, 1}, AdjacencyDecoder::deep, FeatureHead::multinomial, 2, 61), 62);
  const auto ev = loss_and_gradient(s.w, ModelInputs::from(s.a, s.x, s.target), s.eps, cfg);
  auto params = weight_matrices(s.w.enc, s.w.dec);
  const auto grads = ev.grad.matrices();
  const double h = 1e-5;
  for (std::size_t m = 0; m < params.size(); ++m) {
    for (Eigen::Index idx = 0; idx < params[m]->size(); ++idx) {
      double& p = params[m]->data()[idx];
      const double orig = p;
      p = orig + h;
      const double up = oracle_total(s, cfg);
      p = orig - h;
      const double down = oracle_total(s, cfg);
      p = orig;
      const double numeric = (up - down) / (2 * h);
      EXPECT_NEAR(grads[m]->data()[idx], numeric, 1e-6 * std::max(std::abs(numeric), 1e-2))
          << "matrix " << m << " entry " << idx;
    }
  }
  const auto rep = finite_diff_check(s.w, ModelInputs::from(s.a, s.x, s.target), s.eps, cfg, 1e-6);
  EXPECT_LT(rep.max_rel_error, 1e-5) << rep.worst;
}

TEST(Inputs, TargetShapeMustMatchFeatures) {
  const LossConfig cfg;
  const auto s = make_instance(5, 3, {2, 0, 2}, AdjacencyDecoder::deep, FeatureHead::multinomial, 1, 6);
  const DenseMatrix wrong = DenseMatrix::Zero(5, 2);
  EXPECT_THROW(evaluate_loss(s.w, ModelInputs::from(s.a, s.x, wrong), s.eps, cfg), std::invalid_argument);
}

TEST(Backward, FusedAndRecordedPathsAgree) {
  const LossConfig cfg;
  const auto s = make_instance(8, 5, {2, 2, 2}, AdjacencyDecoder::deep, FeatureHead::multinomial, 3, 77);
  const auto in = ModelInputs::from(s.a, s.x);
  const auto fused = loss_and_gradient(s.w, in, s.eps, cfg);
  const auto state = forward(s.w, in, s.eps, cfg, true);
  const auto grad = backward(state, s.w, in, cfg);
  EXPECT_NEAR(fused.loss.total, state.loss.total, 1e-14);
  const auto a = fused.grad.matrices();
  const auto b = grad.matrices();
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_LE((*a[m] - *b[m]).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Backward, ThetaTermGradientIsWeightOverKappa) {
  // Only the θ term depends on κ_θ, so the gradient difference between two
  // values of κ_θ is θ (1/κ₂ − 1/κ₁).
  auto s = make_instance(5, 3, {2, 0, 2}, AdjacencyDecoder::deep, FeatureHead::multinomial, 1, 3);
  const auto in = ModelInputs::from(s.a, s.x);
  LossConfig c1, c2;
  c2.kappa_theta = 250.0;
  const auto g1 = loss_and_gradient(s.w, in, s.eps, c1).grad;
  const auto g2 = loss_and_gradient(s.w, in, s.eps, c2).grad;
  const DenseMatrix diff = g2.dec.x1 - g1.dec.x1;
  const DenseMatrix want = s.w.dec.x1 * (1.0 / 250.0 - 1.0 / 500.0);
  EXPECT_LE((diff - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Backward, MissingIntermediatesThrow) {
  const LossConfig cfg;
  const auto s = make_instance(5, 3, {2, 0, 2}, AdjacencyDecoder::deep, FeatureHead::multinomial, 1, 4);
  const auto in = ModelInputs::from(s.a, s.x);
  const auto state = forward(s.w, in, s.eps, cfg, false);
  EXPECT_THROW(backward(state, s.w, in, cfg), std::logic_error);
}

TEST(FiniteDiffCheck, SmallErrorAcrossVariantsAndSteps) {
  const LossConfig cfg;
  std::uint64_t seed = 900;
  for (const auto& v : variants()) {
    const auto s = make_instance(6, 4, v.split, v.dec, v.head, 2, ++seed);
    const auto in = ModelInputs::from(s.a, s.x);
    const auto rep = finite_diff_check(s.w, in, s.eps, cfg, 1e-6);
    EXPECT_GT(rep.checked, 0u);
    EXPECT_LT(rep.max_rel_error, 1e-5) << rep.worst;
  }
  const auto s = make_instance(6, 4, {2, 2, 2}, AdjacencyDecoder::deep, FeatureHead::multinomial, 2, 42);
  const auto in = ModelInputs::from(s.a, s.x);
  for (double step : {1e-5, 1e-6, 1e-7}) {
    const auto rep = finite_diff_check(s.w, in, s.eps, cfg, step);
    EXPECT_LT(rep.max_rel_error, 1e-5) << step << " " << rep.worst;
  }
}

TEST(FiniteDiffCheck, RejectsNonPositiveStep) {
  const LossConfig cfg;
  const auto s = make_instance(5, 3, {2, 0, 2}, AdjacencyDecoder::deep, FeatureHead::multinomial, 1, 5);
  const auto in = ModelInputs::from(s.a, s.x);
  EXPECT_THROW(finite_diff_check(s.w, in, s.eps, cfg, 0.0), std::invalid_argument);
  EXPECT_THROW(finite_diff_check(s.w, in, s.eps, cfg, -1e-6), std::invalid_argument);
}

