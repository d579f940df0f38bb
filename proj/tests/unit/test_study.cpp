#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "an2vec/study.hpp"

using namespace an2vec;

TEST(StudyGrid, OverlapAndReferenceSplits) {
  const auto ov = overlap_splits(20);
  ASSERT_EQ(ov.size(), 6u);
  for (std::size_t i = 0; i < ov.size(); ++i) {
    const int f_ax = 2 * static_cast<int>(i);
    EXPECT_EQ(ov[i], (DimensionSplit{10 - f_ax, f_ax, 10 - f_ax}));
    EXPECT_EQ(ov[i].total(), 20 - f_ax);
  }
  const auto ref = reference_splits(20);
  ASSERT_EQ(ref.size(), ov.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_EQ(ref[i].total(), ov[i].total());
    EXPECT_EQ(ref[i].f_ax, 0);
    EXPECT_EQ(ref[i].f_a, ref[i].f_x);
  }
  EXPECT_THROW(overlap_splits(7), std::invalid_argument);
}

TEST(StudyGrid, ParameterCountDoesNotDependOnOverlap) {
  // Encoder heads and decoder inputs keep width f_max / 2 per side.
  for (int f_max : {4, 10, 20}) {
    std::set<std::size_t> counts;
    for (const auto& s : overlap_splits(f_max)) {
      ModelShape shape;
      shape.n_features = 10;
      shape.split = s;
      counts.insert(parameter_count(shape));
    }
    EXPECT_EQ(counts.size(), 1u) << f_max;
  }
}

TEST(StudyGrid, CellCountAndSeeds) {
  StudyConfig cfg;
  cfg.alphas = {0.0, 0.5, 1.0};
  cfg.repeats = 4;
  const auto cells = study_cells(cfg);
  EXPECT_EQ(cells.size(), 3u * 2u * 6u * 4u);
  std::set<std::string> keys;
  for (const auto& c : cells) keys.insert(c.key());
  EXPECT_EQ(keys.size(), cells.size());
  // Data and training seeds depend only on (alpha, repeat).
  std::map<std::pair<int, int>, std::uint64_t> data, tr;
  for (const auto& c : cells) {
    const auto k = std::make_pair(c.alpha_index, c.repeat);
    const auto ds = cell_data_seed(cfg, c), ts = cell_train_seed(cfg, c);
    if (data.count(k)) {
      EXPECT_EQ(data[k], ds);
      EXPECT_EQ(tr[k], ts);
    }
    data[k] = ds;
    tr[k] = ts;
  }
  std::set<std::uint64_t> distinct;
  for (const auto& [k, v] : data) distinct.insert(v);
  EXPECT_EQ(distinct.size(), data.size());
}

namespace {

StudyConfig tiny_study() {
  StudyConfig cfg;
  cfg.sbm = {3, 5, 0.6, 0.05};
  cfg.alphas = {0.0, 1.0};
  cfg.f_max = 4;
  cfg.repeats = 2;
  cfg.train.epochs = 4;
  cfg.train.hidden_enc = 8;
  cfg.train.hidden_dec = 8;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(OverlapStudy, RowsFollowCellOrderAndIdenticalModelsMatch) {
  const auto cfg = tiny_study();
  const auto rows = run_overlap_study(cfg);
  const auto cells = study_cells(cfg);
  ASSERT_EQ(rows.size(), cells.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].key(), cells[i].key());
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isfinite(r.best_total));
    EXPECT_LE(r.best_la + r.best_lx, r.best_total + 1.0);
    EXPECT_TRUE(std::isnan(r.auc));
  }
  // The F_AX = 0 overlap model and the F = f_max reference model coincide.
  for (const auto& a : rows)
    for (const auto& b : rows)
      if (a.alpha == b.alpha && a.repeat == b.repeat && a.kind == ModelKind::overlap &&
          b.kind == ModelKind::reference && a.f_ax == 0 && b.f_total == cfg.f_max) {
        EXPECT_EQ(a.best_total, b.best_total);
      }
  // A single cell run directly gives the same numbers.
  EXPECT_EQ(run_study_cell(cfg, cells[3]).best_total, rows[3].best_total);
}

TEST(OverlapStudy, ResumeSkipsCompletedRowsAndJobsDoNotChangeResults) {
  const auto cfg = tiny_study();
  const auto full = run_overlap_study(cfg);
  StudyOptions opts;
  opts.completed.assign(full.begin(), full.begin() + 5);
  int ran = 0;
  opts.on_row = [&](const StudyRow&) { ++ran; };
  opts.jobs = 2;
  const auto resumed = run_overlap_study(cfg, opts);
  ASSERT_EQ(resumed.size(), full.size());
  EXPECT_EQ(ran, static_cast<int>(full.size()) - 5);
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_EQ(resumed[i].best_total, full[i].best_total);
}

namespace {

StudyRow row(double alpha, ModelKind kind, int f, int f_ax, int rep, double total) {
  StudyRow r;
  r.alpha = alpha;
  r.kind = kind;
  r.f_total = f;
  r.f_ax = f_ax;
  r.repeat = rep;
  r.best_total = total;
  r.best_la = total / 2;
  r.best_lx = total / 2;
  return r;
}

}  // namespace

TEST(Summary, RldOfReferenceIsZeroAndRatioOfMeans) {
  std::vector<StudyRow> rows;
  for (int rep = 0; rep < 4; ++rep) {
    rows.push_back(row(0.0, ModelKind::overlap, 4, 0, rep, 1.0 + rep));
    rows.push_back(row(0.0, ModelKind::overlap, 2, 2, rep, 1.5 + rep));
  }
  const auto s = summarize_study(rows, {500, 0.95, 1});
  ASSERT_EQ(s.size(), 2u);
  for (const auto& r : s) {
    EXPECT_EQ(r.n, 4);
    if (r.f_total == 4) {
      EXPECT_EQ(r.rld_total.estimate, 0.0);
      EXPECT_EQ(r.rld_total.lower, 0.0);
      EXPECT_EQ(r.rld_total.upper, 0.0);
      EXPECT_DOUBLE_EQ(r.total.estimate, 2.5);
    } else {
      // Means 3.0 against 2.5.
      EXPECT_NEAR(r.rld_total.estimate, 0.2, 1e-15);
      EXPECT_TRUE(r.rld_total.contains(0.2));
    }
  }
}

TEST(Summary, SlopeRecoversLinearTrend) {
  // RLD = 0.1 + 0.2 α exactly in every repeat.
  std::vector<StudyRow> rows;
  for (double a : {0.0, 0.5, 1.0})
    for (int rep = 0; rep < 5; ++rep) {
      const double base = 1.0 + 0.1 * rep;
      rows.push_back(row(a, ModelKind::reference, 4, 0, rep, base));
      rows.push_back(row(a, ModelKind::reference, 2, 0, rep, base * (1.1 + 0.2 * a)));
    }
  const auto ci = rld_slope_ci(rows, ModelKind::reference, 2, {400, 0.95, 2});
  EXPECT_NEAR(ci.estimate, 0.2, 1e-12);
  EXPECT_NEAR(ci.lower, 0.2, 1e-12);
  EXPECT_NEAR(ci.upper, 0.2, 1e-12);
  EXPECT_THROW(rld_slope_ci(rows, ModelKind::overlap, 2), std::invalid_argument);
}

TEST(Summary, SlopeIntervalCoversZeroForFlatNoise) {
  // No trend in α: the 95% interval should cover 0 in most replications.
  int covered = 0;
  const int reps = 40;
  for (int t = 0; t < reps; ++t) {
    std::vector<StudyRow> rows;
    std::mt19937_64 rng(static_cast<std::uint64_t>(t));
    std::normal_distribution<double> g(0.0, 0.05);
    for (double a : {0.0, 0.5, 1.0})
      for (int rep = 0; rep < 10; ++rep) {
        rows.push_back(row(a, ModelKind::reference, 4, 0, rep, 1.0 + g(rng)));
        rows.push_back(row(a, ModelKind::reference, 2, 0, rep, 1.2 + g(rng)));
      }
    const auto ci = rld_slope_ci(rows, ModelKind::reference, 2, {500, 0.95, static_cast<std::uint64_t>(t)});
    EXPECT_GT(ci.width(), 0.0);
    covered += ci.contains(0.0);
  }
  EXPECT_GE(covered, 32);
}
