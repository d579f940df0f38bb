#include "an2vec/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace an2vec {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_char(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

[[noreturn]] void fail(const std::string& source, std::size_t line_no, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& s, const std::string& source, std::size_t line_no) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) fail(source, line_no, "not a number: '" + s + "'");
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

// Assigns class indices by sorted name and finishes the graph from the edge pairs.
void finish(CitationDataset& ds, const std::vector<std::string>& raw_labels,
            const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  std::set<std::string> names(raw_labels.begin(), raw_labels.end());
  ds.class_names.assign(names.begin(), names.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) index[ds.class_names[i]] = static_cast<int>(i);
  std::vector<int> labels;
  labels.reserve(raw_labels.size());
  for (const auto& l : raw_labels) labels.push_back(index[l]);
  const auto n = static_cast<NodeId>(ds.node_ids.size());
  ds.graph.adjacency = SparseAdjacency(n, std::span<const std::pair<NodeId, NodeId>>(pairs));
  ds.graph.labels = std::move(labels);
  ds.graph.validate();
}

// Resolves one citation between external ids, counting what gets dropped.
void add_citation(CitationDataset& ds, const std::string& a, const std::string& b,
                  std::vector<std::pair<NodeId, NodeId>>& pairs) {
  ++ds.citation_lines;
  auto ia = ds.id_map.find(a), ib = ds.id_map.find(b);
  if (ia == ds.id_map.end() || ib == ds.id_map.end()) {
    ++ds.dropped_unknown;
    return;
  }
  if (ia->second == ib->second) {
    ++ds.dropped_self;
    return;
  }
  pairs.emplace_back(ia->second, ib->second);
}

}  // namespace

CitationDataset load_content_cites(std::istream& content, std::istream& cites, const std::string& name) {
  CitationDataset ds;
  ds.name = name;
  const std::string csrc = name.empty() ? "content" : name + ".content";
  const std::string esrc = name.empty() ? "cites" : name + ".cites";

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(content, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_ws(line);
    if (f.size() < 3) fail(csrc, line_no, "expected an id, at least one word column and a label");
    if (width == 0) width = f.size();
    if (f.size() != width)
      fail(csrc, line_no, "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
    if (!ds.id_map.emplace(f.front(), static_cast<NodeId>(ds.node_ids.size())).second)
      fail(csrc, line_no, "duplicate id '" + f.front() + "'");
    ds.node_ids.push_back(f.front());
    std::vector<double> row(width - 2);
    for (std::size_t j = 1; j + 1 < width; ++j) {
      const auto& t = f[j];
      if (t == "0") row[j - 1] = 0.0;
      else if (t == "1") row[j - 1] = 1.0;
      else fail(csrc, line_no, "word indicator must be 0 or 1, found '" + t + "'");
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(f.back());
  }
  if (rows.empty()) throw ParseError(csrc + ": no nodes");

  ds.graph.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 2));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      ds.graph.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  std::vector<std::pair<NodeId, NodeId>> pairs;
  line_no = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_ws(line);
    if (f.size() != 2) fail(esrc, line_no, "expected 2 fields, found " + std::to_string(f.size()));
    add_citation(ds, f[0], f[1], pairs);
  }
  finish(ds, raw_labels, pairs);
  return ds;
}

CitationDataset load_content_cites(const std::filesystem::path& content_path,
                                   const std::filesystem::path& cites_path) {
  auto c = open_or_throw(content_path);
  auto e = open_or_throw(cites_path);
  return load_content_cites(c, e, content_path.stem().string());
}

CitationDataset load_pubmed(std::istream& nodes, std::istream& cites, const std::string& name) {
  CitationDataset ds;
  ds.name = name;
  const std::string nsrc = name + ".NODE.paper.tab";
  const std::string esrc = name + ".DIRECTED.cites.tab";

  std::string line;
  std::size_t line_no = 0;
  // Header: a title line, then the attribute declarations.
  if (!std::getline(nodes, line)) throw ParseError(nsrc + ": missing header");
  ++line_no;
  if (!std::getline(nodes, line)) throw ParseError(nsrc + ": missing attribute line");
  ++line_no;
  std::map<std::string, Eigen::Index> vocab;
  for (const auto& decl : split_char(line, '\t')) {
    if (decl.rfind("numeric:", 0) != 0) continue;
    const auto rest = decl.substr(8);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) fail(nsrc, line_no, "bad attribute declaration '" + decl + "'");
    // Declaration order defines the column order.
    const auto word = rest.substr(0, colon);
    vocab.emplace(word, static_cast<Eigen::Index>(vocab.size()));
  }
  if (vocab.empty()) fail(nsrc, line_no, "no numeric attributes declared");

  std::vector<std::vector<std::pair<Eigen::Index, double>>> sparse_rows;
  std::vector<std::string> raw_labels;
  while (std::getline(nodes, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_char(line, '\t');
    if (f.size() < 2) fail(nsrc, line_no, "expected an id and a label");
    if (!ds.id_map.emplace(f[0], static_cast<NodeId>(ds.node_ids.size())).second)
      fail(nsrc, line_no, "duplicate id '" + f[0] + "'");
    ds.node_ids.push_back(f[0]);
    std::string label;
    std::vector<std::pair<Eigen::Index, double>> row;
    for (std::size_t k = 1; k < f.size(); ++k) {
      if (f[k].empty()) continue;
      const auto eq = f[k].find('=');
      if (eq == std::string::npos) fail(nsrc, line_no, "expected key=value, found '" + f[k] + "'");
      const auto key = f[k].substr(0, eq);
      const auto value = f[k].substr(eq + 1);
      if (key == "label") {
        label = value;
      } else if (key == "summary") {
        continue;
      } else {
        auto it = vocab.find(key);
        if (it == vocab.end()) fail(nsrc, line_no, "undeclared attribute '" + key + "'");
        row.emplace_back(it->second, parse_double(value, nsrc, line_no));
      }
    }
    if (label.empty()) fail(nsrc, line_no, "missing label");
    raw_labels.push_back(label);
    sparse_rows.push_back(std::move(row));
  }
  if (sparse_rows.empty()) throw ParseError(nsrc + ": no nodes");
  ds.graph.features = DenseMatrix::Zero(static_cast<Eigen::Index>(sparse_rows.size()),
                                        static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < sparse_rows.size(); ++i)
    for (const auto& [j, v] : sparse_rows[i]) ds.graph.features(static_cast<Eigen::Index>(i), j) = v;

  std::vector<std::pair<NodeId, NodeId>> pairs;
  line_no = 0;
  for (int h = 0; h < 2; ++h) {
    if (!std::getline(cites, line)) throw ParseError(esrc + ": missing header");
    ++line_no;
  }
  auto strip = [](const std::string& s) {
    const auto colon = s.find(':');
    return colon == std::string::npos ? s : s.substr(colon + 1);
  };
  while (std::getline(cites, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_char(line, '\t');
    if (f.size() != 4 || f[2] != "|") fail(esrc, line_no, "expected 'id<TAB>paper:a<TAB>|<TAB>paper:b'");
    add_citation(ds, strip(f[1]), strip(f[3]), pairs);
  }
  finish(ds, raw_labels, pairs);
  return ds;
}

CitationDataset load_pubmed(const std::filesystem::path& node_path, const std::filesystem::path& cites_path) {
  auto n = open_or_throw(node_path);
  auto c = open_or_throw(cites_path);
  return load_pubmed(n, c);
}

CitationDataset load_pubmed(const std::filesystem::path& dir) {
  return load_pubmed(dir / "Pubmed-Diabetes.NODE.paper.tab", dir / "Pubmed-Diabetes.DIRECTED.cites.tab");
}

CitationDataset load_named_dataset(const std::string& name, const std::filesystem::path& dir) {
  if (name == "pubmed") return load_pubmed(dir);
  if (name == "cora" || name == "citeseer") {
    auto ds = load_content_cites(dir / (name + ".content"), dir / (name + ".cites"));
    ds.name = name;
    return ds;
  }
  throw std::invalid_argument("unknown dataset '" + name + "' (expected cora, citeseer or pubmed)");
}

FeatureHead feature_head_for(const DenseMatrix& features) {
  const bool binary = (features.array() == 0.0 || features.array() == 1.0).all();
  return binary ? FeatureHead::bernoulli : FeatureHead::gaussian;
}

}  // namespace an2vec
