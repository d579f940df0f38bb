#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace an2vec {

/// Row-major dense matrix of 64-bit reals. Holds node features, embeddings
/// and every weight matrix.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using NodeId = std::int32_t;
using Rng = std::mt19937_64;

/// Raised when operand shapes do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for graphs the balanced losses cannot handle (density 0 or 1).
class DegenerateGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by file readers; the message carries the path and line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Independent RNG streams are derived from one master seed by mixing in a
/// purpose tag and an index (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kNoise = 2;  // reparameterisation draws
inline constexpr std::uint64_t kData = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kBootstrap = 5;
inline constexpr std::uint64_t kFeatures = 6;
inline constexpr std::uint64_t kTrain = 7;  // per-cell training seeds in studies
}  // namespace stream

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace an2vec
