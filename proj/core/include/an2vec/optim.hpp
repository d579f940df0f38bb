#pragma once

#include <span>
#include <vector>

#include "an2vec/common.hpp"
#include "an2vec/model.hpp"

namespace an2vec {

/// Uniform Glorot/Xavier: U[-b, b] with b = sqrt(6 / (fan_in + fan_out)),
/// fan_in = rows, fan_out = cols.
DenseMatrix glorot_init(Eigen::Index rows, Eigen::Index cols, Rng& rng);
double glorot_bound(Eigen::Index fan_in, Eigen::Index fan_out);

/// Glorot-initialised weights for every matrix of the shape.
ModelWeights init_weights(const ModelShape& shape, Rng& rng);

struct AdamState {
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
  long t = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Zero moments shaped like `params`.
  static AdamState for_params(std::span<const DenseMatrix* const> params, double lr);
};

/// One bias-corrected Adam update, in place.
void adam_step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix* const> grads, AdamState& state);

}  // namespace an2vec
