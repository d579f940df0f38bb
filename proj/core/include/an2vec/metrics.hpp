#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace an2vec {

struct RankingResult {
  double auc = 0.0;
  double ap = 0.0;
};

/// Probability that a random positive outscores a random negative, ties
/// counted as one half. Throws std::invalid_argument on single-class input.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Mean, over positives, of precision at the positive's rank. Ranking is a
/// stable sort by (score descending, index ascending).
double average_precision(std::span<const double> scores, std::span<const int> labels);

RankingResult rank_metrics(std::span<const double> scores, std::span<const int> labels);

/// (loss_f - loss_fmax) / loss_fmax. Throws for loss_fmax <= 0.
double relative_loss_disadvantage(double loss_f, double loss_fmax);

struct ConfidenceInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// Central `level` interval of a set of bootstrap draws (linear interpolation
/// between order statistics).
ConfidenceInterval percentile_interval(std::vector<double> draws, double estimate, double level);

/// Percentile bootstrap. `statistic` receives resampled indices into a
/// sample of size n (drawn with replacement).
ConfidenceInterval bootstrap_ci(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                                int resamples, double level, std::uint64_t seed);

ConfidenceInterval bootstrap_mean_ci(std::span<const double> values, int resamples = 2000, double level = 0.95,
                                     std::uint64_t seed = 0);

}  // namespace an2vec
