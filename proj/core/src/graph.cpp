#include "an2vec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace an2vec {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ (stream * 0xd1b54a32d192ed03ULL)) ^ index);
}

SparseAdjacency::SparseAdjacency(NodeId n, std::span<const std::pair<NodeId, NodeId>> pairs)
    : n_(n) {
  edges_.reserve(pairs.size());
  for (auto [i, j] : pairs) edges_.push_back({i, j});
  build();
}

SparseAdjacency::SparseAdjacency(NodeId n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  build();
}

void SparseAdjacency::build() {
  if (n_ < 0) throw std::invalid_argument("node count must be nonnegative");
  for (auto& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_) {
      throw std::invalid_argument("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                  ") out of range for " + std::to_string(n_) + " nodes");
    }
    if (e.u == e.v) throw std::invalid_argument("self-loop on node " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  std::vector<NodeId> deg(static_cast<std::size_t>(n_), 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  row_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (NodeId i = 0; i < n_; ++i) row_ptr_[i + 1] = row_ptr_[i] + deg[i];
  col_.assign(static_cast<std::size_t>(row_ptr_[n_]), 0);
  std::vector<NodeId> fill(row_ptr_.begin(), row_ptr_.end() - 1);
  for (const auto& e : edges_) {
    col_[fill[e.u]++] = e.v;
    col_[fill[e.v]++] = e.u;
  }
  for (NodeId i = 0; i < n_; ++i) std::sort(col_.begin() + row_ptr_[i], col_.begin() + row_ptr_[i + 1]);
}

std::span<const NodeId> SparseAdjacency::neighbors(NodeId i) const {
  return {col_.data() + row_ptr_[i], static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
}

bool SparseAdjacency::has_edge(NodeId i, NodeId j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) return false;
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

DenseMatrix SparseAdjacency::to_dense() const {
  DenseMatrix m = DenseMatrix::Zero(n_, n_);
  for (const auto& e : edges_) {
    m(e.u, e.v) = 1.0;
    m(e.v, e.u) = 1.0;
  }
  return m;
}

double NormalizedAdjacency::at(NodeId i, NodeId j) const {
  auto begin = col_.begin() + row_ptr_[i];
  auto end = col_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_.begin())];
}

DenseMatrix NormalizedAdjacency::to_dense() const {
  DenseMatrix m = DenseMatrix::Zero(n_, n_);
  for (NodeId i = 0; i < n_; ++i)
    for (NodeId p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) m(i, col_[p]) = values_[p];
  return m;
}

NormalizedAdjacency normalize_adjacency(const SparseAdjacency& a) {
  const NodeId n = a.node_count();
  NormalizedAdjacency out;
  out.n_ = n;
  std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(a.degree(i) + 1));

  out.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  out.col_.reserve(2 * a.edge_count() + static_cast<std::size_t>(n));
  out.values_.reserve(out.col_.capacity());
  for (NodeId i = 0; i < n; ++i) {
    bool diag_done = false;
    for (NodeId j : a.neighbors(i)) {
      if (!diag_done && j > i) {
        out.col_.push_back(i);
        out.values_.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
        diag_done = true;
      }
      out.col_.push_back(j);
      out.values_.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    if (!diag_done) {
      out.col_.push_back(i);
      out.values_.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
    }
    out.row_ptr_[i + 1] = static_cast<NodeId>(out.col_.size());
  }
  return out;
}

double density(const SparseAdjacency& a) {
  const double n = static_cast<double>(a.node_count());
  if (n < 1) throw std::invalid_argument("density of an empty node set");
  return 2.0 * static_cast<double>(a.edge_count()) / (n * n);
}

DenseMatrix spmm(const NormalizedAdjacency& s, const DenseMatrix& m) {
  require_shape(s.node_count() == m.rows(), "spmm: adjacency has " + std::to_string(s.node_count()) +
                                                " nodes but operand has " + std::to_string(m.rows()) + " rows");
  DenseMatrix out = DenseMatrix::Zero(m.rows(), m.cols());
  const auto& rp = s.row_ptr();
  const auto& ci = s.col_index();
  const auto& v = s.values();
  for (NodeId i = 0; i < s.node_count(); ++i) {
    auto row = out.row(i);
    for (NodeId p = rp[i]; p < rp[i + 1]; ++p) row.noalias() += v[p] * m.row(ci[p]);
  }
  return out;
}

SparseAdjacency induced_subgraph(const SparseAdjacency& a, std::span<const NodeId> nodes) {
  std::vector<NodeId> remap(static_cast<std::size_t>(a.node_count()), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] < 0 || nodes[k] >= a.node_count()) throw std::invalid_argument("induced_subgraph: node out of range");
    remap[nodes[k]] = static_cast<NodeId>(k);
  }
  std::vector<Edge> kept;
  for (const auto& e : a.edges()) {
    if (remap[e.u] >= 0 && remap[e.v] >= 0) kept.push_back({remap[e.u], remap[e.v]});
  }
  return SparseAdjacency(static_cast<NodeId>(nodes.size()), std::move(kept));
}

SparseAdjacency read_edge_list(std::istream& in, NodeId n) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  NodeId max_id = -1;
  NodeId declared_n = -1;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream ss(line.substr(first + 1));
      std::string key;
      long long declared = 0;
      if (ss >> key >> declared && key == "nodes") declared_n = static_cast<NodeId>(declared);
      continue;
    }
    std::istringstream ss(line);
    long long i = 0, j = 0;
    std::string extra;
    if (!(ss >> i >> j) || (ss >> extra)) {
      throw ParseError("edge list line " + std::to_string(lineno) + ": expected two node ids");
    }
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    max_id = std::max<NodeId>(max_id, static_cast<NodeId>(std::max(i, j)));
  }
  if (n <= 0) n = declared_n >= 0 ? declared_n : max_id + 1;
  return SparseAdjacency(n, std::move(edges));
}

SparseAdjacency read_edge_list(const std::filesystem::path& path, NodeId n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_edge_list(in, n);
}

void write_edge_list(std::ostream& out, const SparseAdjacency& a) {
  out << "# nodes " << a.node_count() << " edges " << a.edge_count() << '\n';
  for (const auto& e : a.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_edge_list(const std::filesystem::path& path, const SparseAdjacency& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_edge_list(out, a);
}

}  // namespace an2vec
