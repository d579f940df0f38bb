#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "an2vec/metrics.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

namespace an2vec::cli {

/// Link-prediction or node-classification grid over test sizes, per-task
/// embedding widths, overlaps and decoders on one dataset.
struct BenchmarkGrid {
  std::string task = "linkpred";  // or "nodeclass"
  std::string dataset;            // cora, citeseer, pubmed; empty for a generated graph directory
  std::filesystem::path data;
  std::vector<double> test_fracs{0.15};
  std::vector<int> per_task{16};
  std::vector<int> overlaps;  // empty: {0, per_task} for each width
  std::vector<AdjacencyDecoder> decoders{AdjacencyDecoder::shallow, AdjacencyDecoder::deep};
  int repeats = 10;
  std::uint64_t seed = 0;
  TrainConfig train;
  bool auto_head = true;  // pick the feature head from the loaded data

  void validate() const;
};

/// Defaults of the citation benchmarks: 200 epochs, hidden width 32.
nlohmann::json benchmark_grid_defaults();
BenchmarkGrid benchmark_grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkGrid& g);

struct BenchmarkCell {
  AdjacencyDecoder decoder = AdjacencyDecoder::shallow;
  int per_task = 0;
  int f_ax = 0;
  int test_frac_index = 0;
  double test_frac = 0.0;
  int repeat = 0;

  DimensionSplit split() const { return {per_task - f_ax, f_ax, per_task - f_ax}; }
  std::string key() const;
};

/// Long-format row; auc/ap or f1 is NaN depending on the task.
struct BenchmarkRow {
  AdjacencyDecoder decoder = AdjacencyDecoder::shallow;
  int per_task = 0;
  int f_ax = 0;
  double test_frac = 0.0;
  int repeat = 0;
  double auc = 0.0;
  double ap = 0.0;
  double f1 = 0.0;
  double best_total = 0.0;

  std::string key() const;
};

std::vector<BenchmarkCell> benchmark_cells(const BenchmarkGrid& g);

/// The split depends on (test_frac, repeat) and training on the repeat only,
/// so every architecture of a repeat sees the same held-out set.
std::uint64_t benchmark_split_seed(const BenchmarkGrid& g, const BenchmarkCell& c);
std::uint64_t benchmark_train_seed(const BenchmarkGrid& g, const BenchmarkCell& c);

BenchmarkRow run_benchmark_cell(const BenchmarkGrid& g, const FeaturedGraph& data, const BenchmarkCell& c);

struct GridOptions {
  int jobs = 1;
  std::vector<BenchmarkRow> completed;
  std::function<void(const BenchmarkRow&)> on_row;  // called serially
};

/// Rows follow benchmark_cells() order.
std::vector<BenchmarkRow> run_benchmark_grid(const BenchmarkGrid& g, const FeaturedGraph& data,
                                             const GridOptions& opts = {});

/// decoder,per_task,f_ax,test_frac,repeat,auc,ap,f1,best_total
void write_benchmark_header(std::ostream& out);
void write_benchmark_row(std::ostream& out, const BenchmarkRow& r);
/// Ignores a truncated last line.
std::vector<BenchmarkRow> read_benchmark_csv(std::istream& in);

struct BenchmarkSummary {
  AdjacencyDecoder decoder = AdjacencyDecoder::shallow;
  int per_task = 0;
  int f_ax = 0;
  double test_frac = 0.0;
  int n = 0;
  ConfidenceInterval auc, ap, f1;  // bootstrap over repeats; NaN when not measured
};

std::vector<BenchmarkSummary> summarize_benchmark(const std::vector<BenchmarkRow>& rows, int resamples,
                                                  double level, std::uint64_t seed);
void write_benchmark_summary_csv(std::ostream& out, const std::vector<BenchmarkSummary>& rows);

}  // namespace an2vec::cli
