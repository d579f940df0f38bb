#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "an2vec/common.hpp"

namespace an2vec {

/// Undirected pair, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Binary symmetric adjacency without self-loops. Each undirected edge is
/// stored once; neighbour lists are row-compressed with sorted columns.
class SparseAdjacency {
 public:
  SparseAdjacency() = default;

  /// Builds from an arbitrary pair list. Pairs are normalised to u < v and
  /// de-duplicated. Self-loops and out-of-range ids throw std::invalid_argument.
  SparseAdjacency(NodeId n, std::span<const std::pair<NodeId, NodeId>> pairs);
  SparseAdjacency(NodeId n, std::vector<Edge> edges);

  NodeId node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId i) const;
  NodeId degree(NodeId i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
  bool has_edge(NodeId i, NodeId j) const;

  DenseMatrix to_dense() const;

 private:
  void build();

  NodeId n_ = 0;
  std::vector<Edge> edges_;
  std::vector<NodeId> row_ptr_{0};
  std::vector<NodeId> col_;
};

/// D̃^(-1/2) (A + I) D̃^(-1/2) in CSR form with sorted column indices.
class NormalizedAdjacency {
 public:
  NormalizedAdjacency() = default;

  NodeId node_count() const { return n_; }
  std::size_t nonzero_count() const { return values_.size(); }
  const std::vector<NodeId>& row_ptr() const { return row_ptr_; }
  const std::vector<NodeId>& col_index() const { return col_; }
  const std::vector<double>& values() const { return values_; }

  /// Entry lookup (zero outside the pattern).
  double at(NodeId i, NodeId j) const;
  DenseMatrix to_dense() const;

 private:
  friend NormalizedAdjacency normalize_adjacency(const SparseAdjacency& a);

  NodeId n_ = 0;
  std::vector<NodeId> row_ptr_{0};
  std::vector<NodeId> col_;
  std::vector<double> values_;
};

NormalizedAdjacency normalize_adjacency(const SparseAdjacency& a);

/// Σ_ij A_ij / N², both orientations counted.
double density(const SparseAdjacency& a);

/// Sparse × dense product. Each output row is reduced in column order, so
/// results do not depend on scheduling.
DenseMatrix spmm(const NormalizedAdjacency& s, const DenseMatrix& m);

/// Subgraph induced by `nodes`; node k of the result is nodes[k].
SparseAdjacency induced_subgraph(const SparseAdjacency& a, std::span<const NodeId> nodes);

// Edge-list text format: one "i j" pair per line, '#' starts a comment line.
SparseAdjacency read_edge_list(std::istream& in, NodeId n);
SparseAdjacency read_edge_list(const std::filesystem::path& path, NodeId n);
void write_edge_list(std::ostream& out, const SparseAdjacency& a);
void write_edge_list(const std::filesystem::path& path, const SparseAdjacency& a);

}  // namespace an2vec
