#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "an2vec/datasets.hpp"
#include "an2vec/study.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

namespace an2vec {

/// Shortest text that reads back to the same double.
std::string format_real(double v);
/// format_real, or an empty cell for NaN (a value that was not measured).
std::string format_cell(double v);

/// Comma-separated fields of one line; a trailing '\r' is dropped.
std::vector<std::string> split_csv(const std::string& line);
/// Empty and "nan" cells read as NaN. `where` prefixes the ParseError message.
double parse_real(const std::string& s, const std::string& where);
long long parse_int(const std::string& s, const std::string& where);

// FeaturedGraph directory layout: edges.txt, features.csv (one row per node,
// no header), labels.csv ("node,label[,community]", only when labels exist).
inline constexpr const char* kEdgesFile = "edges.txt";
inline constexpr const char* kFeaturesFile = "features.csv";
inline constexpr const char* kLabelsFile = "labels.csv";
inline constexpr const char* kManifestFile = "manifest.json";

struct GraphFiles {
  std::filesystem::path edges, features, labels;
};

GraphFiles save_featured_graph(const std::filesystem::path& dir, const FeaturedGraph& g);
/// Reads the directory layout above; labels.csv is optional.
FeaturedGraph load_featured_graph(const std::filesystem::path& dir);

void write_matrix_csv(std::ostream& out, const DenseMatrix& m, const std::vector<std::string>& header = {});
DenseMatrix read_matrix_csv(std::istream& in, bool has_header = false);

/// N × F embedding export with a "node,mu_0,…" header.
void write_embeddings_csv(const std::filesystem::path& path, const DenseMatrix& mu);

/// epoch,l_a_scaled,l_x_scaled,l_kl_scaled,l_theta_scaled,total,total_at_mean
void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const EpochRecord& r);
void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);

/// alpha,f_total,f_ax,kind,repeat,best_total,best_la,best_lx,auc,ap,f1
void write_study_header(std::ostream& out);
void write_study_row(std::ostream& out, const StudyRow& r);
std::vector<StudyRow> read_study_csv(std::istream& in);
std::vector<StudyRow> read_study_csv(const std::filesystem::path& path);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

nlohmann::json to_json(const SbmConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const LossConfig& c);
nlohmann::json to_json(const DimensionSplit& s);
nlohmann::json to_json(const CitationDataset& ds);  // N, D, classes, edges, drop counts
nlohmann::json to_json(const StudyConfig& c);
nlohmann::json to_json(const ConfidenceInterval& ci);

/// Writes JSON with a trailing newline, replacing any existing file.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace an2vec
