#include "an2vec/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace an2vec {

namespace {

std::ofstream create(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::ifstream open(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

}  // namespace

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_real(const std::string& s, const std::string& where) {
  if (s.empty() || s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(where + ": not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const std::string& where) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(where + ": not an integer: '" + s + "'");
  return v;
}

std::string format_cell(double v) { return std::isnan(v) ? std::string() : format_real(v); }

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_real(m(i, j));
    out << '\n';
  }
}

DenseMatrix read_matrix_csv(std::istream& in, bool has_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& t : f) row.push_back(parse_real(t, "csv line " + std::to_string(line_no)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("csv line " + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  DenseMatrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

GraphFiles save_featured_graph(const std::filesystem::path& dir, const FeaturedGraph& g) {
  g.validate();
  std::filesystem::create_directories(dir);
  GraphFiles files{dir / kEdgesFile, dir / kFeaturesFile, {}};
  write_edge_list(files.edges, g.adjacency);
  {
    auto out = create(files.features);
    write_matrix_csv(out, g.features);
  }
  if (g.labels) {
    files.labels = dir / kLabelsFile;
    auto out = create(files.labels);
    out << (g.community ? "node,label,community\n" : "node,label\n");
    for (std::size_t i = 0; i < g.labels->size(); ++i) {
      out << i << ',' << (*g.labels)[i];
      if (g.community) out << ',' << (*g.community)[i];
      out << '\n';
    }
  }
  return files;
}

FeaturedGraph load_featured_graph(const std::filesystem::path& dir) {
  FeaturedGraph g;
  {
    auto in = open(dir / kFeaturesFile);
    g.features = read_matrix_csv(in);
  }
  g.adjacency = read_edge_list(dir / kEdgesFile, static_cast<NodeId>(g.features.rows()));
  if (std::filesystem::exists(dir / kLabelsFile)) {
    auto in = open(dir / kLabelsFile);
    std::string line;
    std::getline(in, line);
    const bool has_community = split_csv(line).size() == 3;
    std::vector<int> labels, community;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const std::string where = kLabelsFile + std::string(":") + std::to_string(line_no);
      const auto f = split_csv(line);
      if (f.size() != (has_community ? 3u : 2u)) throw ParseError(where + ": wrong field count");
      if (parse_int(f[0], where) != static_cast<long long>(labels.size()))
        throw ParseError(where + ": nodes must be listed in order");
      labels.push_back(static_cast<int>(parse_int(f[1], where)));
      if (has_community) community.push_back(static_cast<int>(parse_int(f[2], where)));
    }
    g.labels = std::move(labels);
    if (has_community) g.community = std::move(community);
  }
  g.validate();
  return g;
}

void write_embeddings_csv(const std::filesystem::path& path, const DenseMatrix& mu) {
  auto out = create(path);
  out << "node";
  for (Eigen::Index j = 0; j < mu.cols(); ++j) out << ",mu_" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < mu.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < mu.cols(); ++j) out << ',' << format_real(mu(i, j));
    out << '\n';
  }
}

void write_trace_header(std::ostream& out) {
  out << "epoch,l_a_scaled,l_x_scaled,l_kl_scaled,l_theta_scaled,total,total_at_mean\n";
}

void write_trace_row(std::ostream& out, const EpochRecord& r) {
  out << r.epoch << ',' << format_real(r.loss.l_a_scaled) << ',' << format_real(r.loss.l_x_scaled) << ','
      << format_real(r.loss.l_kl_scaled) << ',' << format_real(r.loss.l_theta_scaled) << ','
      << format_real(r.loss.total) << ',' << format_cell(r.total_at_mean) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
  auto out = create(path);
  write_trace_header(out);
  for (const auto& r : trace.epochs) write_trace_row(out, r);
}

void write_study_header(std::ostream& out) {
  out << "alpha,f_total,f_ax,kind,repeat,best_total,best_la,best_lx,auc,ap,f1\n";
}

void write_study_row(std::ostream& out, const StudyRow& r) {
  out << format_real(r.alpha) << ',' << r.f_total << ',' << r.f_ax << ',' << to_string(r.kind) << ',' << r.repeat
      << ',' << format_real(r.best_total) << ',' << format_real(r.best_la) << ',' << format_real(r.best_lx) << ','
      << format_cell(r.auc) << ',' << format_cell(r.ap) << ',' << format_cell(r.f1) << '\n';
}

std::vector<StudyRow> read_study_csv(std::istream& in) {
  std::vector<StudyRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty() || line == "\r") continue;
    const std::string where = "study csv line " + std::to_string(line_no);
    // An interrupted writer leaves a final line without its newline.
    if (in.eof()) break;
    const auto f = split_csv(line);
    if (f.size() != 11) throw ParseError(where + ": expected 11 fields");
    StudyRow r;
    r.alpha = parse_real(f[0], where);
    r.f_total = static_cast<int>(parse_int(f[1], where));
    r.f_ax = static_cast<int>(parse_int(f[2], where));
    r.kind = parse_model_kind(f[3]);
    r.repeat = static_cast<int>(parse_int(f[4], where));
    r.best_total = parse_real(f[5], where);
    r.best_la = parse_real(f[6], where);
    r.best_lx = parse_real(f[7], where);
    r.auc = parse_real(f[8], where);
    r.ap = parse_real(f[9], where);
    r.f1 = parse_real(f[10], where);
    rows.push_back(r);
  }
  return rows;
}

std::vector<StudyRow> read_study_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return read_study_csv(in);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "alpha,kind,f_total,f_ax,n";
  for (const char* m : {"total", "la", "lx", "rld_total", "rld_la", "rld_lx"})
    out << ',' << m << "_mean," << m << "_lo," << m << "_hi";
  out << '\n';
  for (const auto& s : rows) {
    out << format_real(s.alpha) << ',' << to_string(s.kind) << ',' << s.f_total << ',' << s.f_ax << ',' << s.n;
    for (const auto* ci : {&s.total, &s.la, &s.lx, &s.rld_total, &s.rld_la, &s.rld_lx})
      out << ',' << format_real(ci->estimate) << ',' << format_real(ci->lower) << ',' << format_real(ci->upper);
    out << '\n';
  }
}

nlohmann::json to_json(const SbmConfig& c) {
  return {{"m", c.m}, {"n", c.n}, {"p_in", c.p_in}, {"p_out", c.p_out}};
}

nlohmann::json to_json(const LossConfig& c) {
  return {{"kappa_kl", c.kappa_kl},
          {"kappa_theta", c.kappa_theta},
          {"clip_eps", c.clip_eps},
          {"include_diagonal", c.include_diagonal}};
}

nlohmann::json to_json(const DimensionSplit& s) { return {{"f_a", s.f_a}, {"f_ax", s.f_ax}, {"f_x", s.f_x}}; }

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"k_samples", c.k_samples},
          {"lr", c.lr},
          {"seed", c.seed},
          {"loss", to_json(c.loss)},
          {"split", to_json(c.split)},
          {"hidden_enc", c.hidden_enc},
          {"hidden_dec", c.hidden_dec},
          {"decoder", std::string(to_string(c.decoder))},
          {"feature_head", std::string(to_string(c.head))},
          {"resample_noise", c.resample_noise},
          {"track_mean_loss", c.track_mean_loss},
          {"renormalize_features", c.renormalize_features},
          {"feature_target", std::string(to_string(c.feature_target))}};
}

nlohmann::json to_json(const CitationDataset& ds) {
  return {{"name", ds.name},
          {"nodes", ds.graph.node_count()},
          {"features", ds.graph.feature_count()},
          {"classes", ds.class_names.size()},
          {"class_names", ds.class_names},
          {"edges", ds.graph.adjacency.edge_count()},
          {"citation_lines", ds.citation_lines},
          {"dropped_unknown", ds.dropped_unknown},
          {"dropped_self", ds.dropped_self}};
}

nlohmann::json to_json(const StudyConfig& c) {
  return {{"sbm", to_json(c.sbm)}, {"noise_sigma", c.noise_sigma}, {"alphas", c.alphas}, {"f_max", c.f_max},
          {"repeats", c.repeats},  {"train", to_json(c.train)},    {"seed", c.seed}};
}

nlohmann::json to_json(const ConfidenceInterval& ci) {
  return {{"estimate", ci.estimate}, {"lower", ci.lower}, {"upper", ci.upper}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = create(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace an2vec
