#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "an2vec/metrics.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

namespace an2vec {

enum class ModelKind { overlap, reference };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

/// One training run of the overlap study.
struct StudyCell {
  int alpha_index = 0;
  double alpha = 0.0;
  ModelKind kind = ModelKind::overlap;
  DimensionSplit split;
  int repeat = 0;

  int f_total() const { return split.total(); }
  /// Key shared by every cell with the same (alpha, kind, width, repeat).
  std::string key() const;
};

/// Long-format result row. auc, ap and f1 are NaN when not measured.
struct StudyRow {
  double alpha = 0.0;
  int f_total = 0;
  int f_ax = 0;
  ModelKind kind = ModelKind::overlap;
  int repeat = 0;
  double best_total = 0.0;
  double best_la = 0.0;  // per-component minimum over epochs, scaled
  double best_lx = 0.0;
  double auc = 0.0;
  double ap = 0.0;
  double f1 = 0.0;

  std::string key() const;
};

struct StudyConfig {
  SbmConfig sbm;
  double noise_sigma = 0.1;
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  int f_max = 20;
  int repeats = 20;
  TrainConfig train;  // split and seed are overridden per cell
  std::uint64_t seed = 0;

  void validate() const;
};

/// Overlap models: F_A = F_X = f_max/2 - F_AX for F_AX ∈ {0, 2, …, f_max/2}.
/// Reference models: F_A = F_X = F/2, F_AX = 0, for the same totals F.
std::vector<DimensionSplit> overlap_splits(int f_max);
std::vector<DimensionSplit> reference_splits(int f_max);

/// Every (alpha, kind, split, repeat) combination in a fixed order.
std::vector<StudyCell> study_cells(const StudyConfig& cfg);

/// The data seed depends only on (alpha, repeat), so every model of one
/// repeat sees the same network; the same holds for the training seed.
std::uint64_t cell_data_seed(const StudyConfig& cfg, const StudyCell& cell);
std::uint64_t cell_train_seed(const StudyConfig& cfg, const StudyCell& cell);

StudyRow run_study_cell(const StudyConfig& cfg, const StudyCell& cell);

struct StudyOptions {
  int jobs = 1;
  std::vector<StudyRow> completed;                      // rows whose key is present are not rerun
  std::function<void(const StudyRow&)> on_row;          // called serially as rows finish
};

/// Runs all cells. Identical architectures (the F_AX = 0 overlap model and
/// the F = f_max reference model) are trained once per (alpha, repeat).
/// Returned rows follow study_cells() order.
std::vector<StudyRow> run_overlap_study(const StudyConfig& cfg, const StudyOptions& opts = {});

struct SummaryRow {
  double alpha = 0.0;
  ModelKind kind = ModelKind::overlap;
  int f_total = 0;
  int f_ax = 0;
  int n = 0;
  ConfidenceInterval total, la, lx;              // mean best loss
  ConfidenceInterval rld_total, rld_la, rld_lx;  // against the F = f_max model of the same kind
};

struct SummaryOptions {
  int resamples = 2000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

/// Bootstrap over repeats. Relative loss disadvantage is a ratio of means,
/// with repeats resampled jointly for numerator and denominator.
std::vector<SummaryRow> summarize_study(const std::vector<StudyRow>& rows, const SummaryOptions& opts = {});

/// OLS slope of the relative total-loss disadvantage against alpha for one
/// (kind, F). The interval resamples repeats independently within each alpha.
ConfidenceInterval rld_slope_ci(const std::vector<StudyRow>& rows, ModelKind kind, int f_total,
                                const SummaryOptions& opts = {});

}  // namespace an2vec
