#include "an2vec/optim.hpp"

#include <cmath>

namespace an2vec {

double glorot_bound(Eigen::Index fan_in, Eigen::Index fan_out) {
  if (fan_in < 1 || fan_out < 1) throw std::invalid_argument("glorot: fan_in and fan_out must be >= 1");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

DenseMatrix glorot_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double b = glorot_bound(rows, cols);
  std::uniform_real_distribution<double> unif(-b, b);
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = unif(rng);
  return m;
}

ModelWeights init_weights(const ModelShape& shape, Rng& rng) {
  ModelWeights w = zero_weights(shape);
  for (DenseMatrix* m : weight_matrices(w.enc, w.dec)) *m = glorot_init(m->rows(), m->cols(), rng);
  return w;
}

AdamState AdamState::for_params(std::span<const DenseMatrix* const> params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const DenseMatrix* p : params) {
    s.m.push_back(DenseMatrix::Zero(p->rows(), p->cols()));
    s.v.push_back(DenseMatrix::Zero(p->rows(), p->cols()));
  }
  return s;
}

void adam_step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix* const> grads, AdamState& st) {
  require_shape(params.size() == grads.size() && params.size() == st.m.size(),
                "adam: parameter, gradient and state counts differ");
  ++st.t;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    DenseMatrix& w = *params[i];
    const DenseMatrix& g = *grads[i];
    require_shape(w.rows() == g.rows() && w.cols() == g.cols() && st.m[i].rows() == w.rows() &&
                      st.m[i].cols() == w.cols(),
                  "adam: shape mismatch at parameter " + std::to_string(i));
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g.cwiseAbs2();
    w.array() -= st.lr * (st.m[i].array() / c1) / ((st.v[i].array() / c2).sqrt() + st.eps);
  }
}

}  // namespace an2vec
