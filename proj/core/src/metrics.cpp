#include "an2vec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "an2vec/common.hpp"

namespace an2vec {

namespace {

void check_pair(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw std::invalid_argument("scores contain NaN");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the mid-rank of every tie group keeps the sum integral.
  std::uint64_t pos = 0, twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const std::uint64_t twice_mid = (i + 1) + (j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] > 0) {
        ++pos;
        twice_rank_sum += twice_mid;
      }
    }
    i = j + 1;
  }
  const std::uint64_t neg = n - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("auc needs at least one positive and one negative");
  const std::uint64_t twice_u = twice_rank_sum - pos * (pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) throw std::invalid_argument("average precision needs at least one positive");
  return sum / static_cast<double>(hits);
}

RankingResult rank_metrics(std::span<const double> scores, std::span<const int> labels) {
  return {auc(scores, labels), average_precision(scores, labels)};
}

double relative_loss_disadvantage(double loss_f, double loss_fmax) {
  if (!(loss_fmax > 0.0)) throw std::invalid_argument("relative loss disadvantage needs a positive reference loss");
  return (loss_f - loss_fmax) / loss_fmax;
}

ConfidenceInterval percentile_interval(std::vector<double> draws, double estimate, double level) {
  if (draws.empty()) throw std::invalid_argument("percentile interval of no draws");
  std::sort(draws.begin(), draws.end());
  auto quantile = [&](double q) {
    // Linear interpolation between order statistics.
    const double pos = q * static_cast<double>(draws.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, draws.size() - 1);
    return draws[lo] + (pos - static_cast<double>(lo)) * (draws[hi] - draws[lo]);
  };
  ConfidenceInterval ci;
  ci.estimate = estimate;
  ci.lower = quantile((1.0 - level) / 2.0);
  ci.upper = quantile(1.0 - (1.0 - level) / 2.0);
  return ci;
}

ConfidenceInterval bootstrap_ci(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                                int resamples, double level, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("bootstrap over an empty sample");
  if (resamples < 1 || !(level > 0.0 && level < 1.0)) throw std::invalid_argument("bad bootstrap parameters");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const double estimate = statistic(idx);

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    for (auto& v : idx) v = pick(rng);
    stats.push_back(statistic(idx));
  }
  return percentile_interval(std::move(stats), estimate, level);
}

ConfidenceInterval bootstrap_mean_ci(std::span<const double> values, int resamples, double level,
                                     std::uint64_t seed) {
  return bootstrap_ci(
      values.size(),
      [&](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (auto i : idx) s += values[i];
        return s / static_cast<double>(idx.size());
      },
      resamples, level, seed);
}

}  // namespace an2vec
