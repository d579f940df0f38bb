#include "an2vec/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

namespace an2vec {

std::string_view to_string(ModelKind k) { return k == ModelKind::overlap ? "overlap" : "reference"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "overlap") return ModelKind::overlap;
  if (s == "reference") return ModelKind::reference;
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

namespace {

std::string make_key(double alpha, ModelKind kind, int f_total, int f_ax, int repeat) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g|%s|%d|%d|%d", alpha, std::string(to_string(kind)).c_str(), f_total, f_ax,
                repeat);
  return buf;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string StudyCell::key() const { return make_key(alpha, kind, f_total(), split.f_ax, repeat); }
std::string StudyRow::key() const { return make_key(alpha, kind, f_total, f_ax, repeat); }

void StudyConfig::validate() const {
  sbm.validate();
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (alphas.empty()) throw std::invalid_argument("study needs at least one alpha");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (f_max < 2 || f_max % 2 != 0) throw std::invalid_argument("f_max must be even and >= 2");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  train.validate();
}

std::vector<DimensionSplit> overlap_splits(int f_max) {
  if (f_max < 2 || f_max % 2 != 0) throw std::invalid_argument("f_max must be even and >= 2");
  std::vector<DimensionSplit> out;
  const int half = f_max / 2;
  for (int ov = 0; ov <= half; ov += 2) out.push_back({half - ov, ov, half - ov});
  return out;
}

std::vector<DimensionSplit> reference_splits(int f_max) {
  std::vector<DimensionSplit> out;
  for (const auto& s : overlap_splits(f_max)) {
    const int f = s.total();
    out.push_back({f / 2, 0, f - f / 2});
  }
  return out;
}

std::vector<StudyCell> study_cells(const StudyConfig& cfg) {
  std::vector<StudyCell> out;
  const auto ov = overlap_splits(cfg.f_max);
  const auto ref = reference_splits(cfg.f_max);
  for (int ai = 0; ai < static_cast<int>(cfg.alphas.size()); ++ai) {
    for (ModelKind kind : {ModelKind::overlap, ModelKind::reference}) {
      const auto& splits = kind == ModelKind::overlap ? ov : ref;
      for (const auto& s : splits)
        for (int r = 0; r < cfg.repeats; ++r) out.push_back({ai, cfg.alphas[static_cast<std::size_t>(ai)], kind, s, r});
    }
  }
  return out;
}

std::uint64_t cell_data_seed(const StudyConfig& cfg, const StudyCell& cell) {
  return derive_seed(derive_seed(cfg.seed, stream::kData, static_cast<std::uint64_t>(cell.alpha_index)),
                     stream::kData, static_cast<std::uint64_t>(cell.repeat));
}

std::uint64_t cell_train_seed(const StudyConfig& cfg, const StudyCell& cell) {
  return derive_seed(derive_seed(cfg.seed, stream::kTrain, static_cast<std::uint64_t>(cell.alpha_index)),
                     stream::kTrain, static_cast<std::uint64_t>(cell.repeat));
}

StudyRow run_study_cell(const StudyConfig& cfg, const StudyCell& cell) {
  const FeaturedGraph g = generate_featured_graph(cfg.sbm, {cell.alpha, cfg.noise_sigma}, cell_data_seed(cfg, cell));
  TrainConfig tc = cfg.train;
  tc.split = cell.split;
  tc.seed = cell_train_seed(cfg, cell);
  const TrainResult tr = train(g, tc);

  StudyRow row;
  row.alpha = cell.alpha;
  row.f_total = cell.f_total();
  row.f_ax = cell.split.f_ax;
  row.kind = cell.kind;
  row.repeat = cell.repeat;
  row.best_total = tr.trace.best_total;
  row.best_la = tr.trace.best_of(&LossBreakdown::l_a_scaled);
  row.best_lx = tr.trace.best_of(&LossBreakdown::l_x_scaled);
  row.auc = row.ap = row.f1 = kNaN;
  return row;
}

std::vector<StudyRow> run_overlap_study(const StudyConfig& cfg, const StudyOptions& opts) {
  cfg.validate();
  const auto cells = study_cells(cfg);

  std::unordered_map<std::string, StudyRow> done;
  for (const auto& r : opts.completed) done.emplace(r.key(), r);

  // Cells sharing an architecture and (alpha, repeat) are the same run.
  auto arch_key = [](const StudyCell& c) {
    return std::to_string(c.alpha_index) + "|" + std::to_string(c.repeat) + "|" + std::to_string(c.split.f_a) + "|" +
           std::to_string(c.split.f_ax) + "|" + std::to_string(c.split.f_x);
  };
  std::vector<std::optional<StudyRow>> results(cells.size());
  std::map<std::string, std::size_t> finished;  // arch key -> a completed cell
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (auto it = done.find(cells[i].key()); it != done.end()) {
      results[i] = it->second;
      finished.emplace(arch_key(cells[i]), i);
    }
  }
  std::map<std::string, std::size_t> primary;  // arch key -> index of the cell that runs
  std::vector<std::size_t> todo;
  std::vector<std::vector<std::size_t>> followers(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (results[i]) continue;
    const auto k = arch_key(cells[i]);
    if (auto it = finished.find(k); it != finished.end()) {
      StudyRow copy = *results[it->second];
      copy.kind = cells[i].kind;
      results[i] = copy;
      if (opts.on_row) opts.on_row(copy);
      continue;
    }
    auto [it, inserted] = primary.emplace(k, i);
    if (inserted) {
      todo.push_back(i);
    } else {
      followers[it->second].push_back(i);
    }
  }

  std::mutex mu;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= todo.size()) return;
      const std::size_t i = todo[t];
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        StudyRow row = run_study_cell(cfg, cells[i]);
        std::lock_guard lock(mu);
        results[i] = row;
        if (opts.on_row) opts.on_row(row);
        for (std::size_t f : followers[i]) {
          if (results[f]) continue;
          StudyRow copy = row;
          copy.kind = cells[f].kind;
          results[f] = copy;
          if (opts.on_row) opts.on_row(copy);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<StudyRow> out;
  out.reserve(cells.size());
  for (auto& r : results) {
    if (!r) throw std::logic_error("study cell left without a result");
    out.push_back(*r);
  }
  return out;
}

namespace {

struct Group {
  double alpha;
  ModelKind kind;
  int f_total;
  int f_ax;
  std::vector<const StudyRow*> rows;  // sorted by repeat
};

using GroupKey = std::tuple<double, int, int>;  // alpha, kind, f_total

std::map<GroupKey, Group> group_rows(const std::vector<StudyRow>& rows) {
  std::map<GroupKey, Group> groups;
  for (const auto& r : rows) {
    const GroupKey k{r.alpha, static_cast<int>(r.kind), r.f_total};
    auto [it, inserted] = groups.try_emplace(k, Group{r.alpha, r.kind, r.f_total, r.f_ax, {}});
    it->second.rows.push_back(&r);
  }
  for (auto& [k, g] : groups)
    std::sort(g.rows.begin(), g.rows.end(), [](const StudyRow* a, const StudyRow* b) { return a->repeat < b->repeat; });
  return groups;
}

// Pairs repeats of a group with its reference group; both must cover the same repeats.
std::vector<std::pair<const StudyRow*, const StudyRow*>> pair_repeats(const Group& g, const Group& ref) {
  std::map<int, const StudyRow*> by_repeat;
  for (const auto* r : ref.rows) by_repeat[r->repeat] = r;
  std::vector<std::pair<const StudyRow*, const StudyRow*>> out;
  for (const auto* r : g.rows) {
    auto it = by_repeat.find(r->repeat);
    if (it == by_repeat.end()) throw std::invalid_argument("study rows lack a reference run for some repeat");
    out.emplace_back(r, it->second);
  }
  return out;
}

using Pairs = std::vector<std::pair<const StudyRow*, const StudyRow*>>;

double rld_of(const Pairs& p, std::span<const std::size_t> idx, double StudyRow::*field) {
  double num = 0.0, den = 0.0;
  for (auto i : idx) {
    num += p[i].first->*field;
    den += p[i].second->*field;
  }
  return relative_loss_disadvantage(num, den);
}

int group_f_max(const std::map<GroupKey, Group>& groups, double alpha, ModelKind kind) {
  int f_max = 0;
  for (const auto& [k, g] : groups)
    if (g.alpha == alpha && g.kind == kind) f_max = std::max(f_max, g.f_total);
  return f_max;
}

}  // namespace

std::vector<SummaryRow> summarize_study(const std::vector<StudyRow>& rows, const SummaryOptions& opts) {
  const auto groups = group_rows(rows);
  std::vector<SummaryRow> out;
  std::uint64_t index = 0;
  for (const auto& [k, g] : groups) {
    SummaryRow s;
    s.alpha = g.alpha;
    s.kind = g.kind;
    s.f_total = g.f_total;
    s.f_ax = g.f_ax;
    s.n = static_cast<int>(g.rows.size());
    auto field_values = [&](double StudyRow::*field) {
      std::vector<double> v;
      for (const auto* r : g.rows) v.push_back(r->*field);
      return v;
    };
    const auto tot = field_values(&StudyRow::best_total);
    const auto la = field_values(&StudyRow::best_la);
    const auto lx = field_values(&StudyRow::best_lx);
    s.total = bootstrap_mean_ci(tot, opts.resamples, opts.level, derive_seed(opts.seed, stream::kBootstrap, index++));
    s.la = bootstrap_mean_ci(la, opts.resamples, opts.level, derive_seed(opts.seed, stream::kBootstrap, index++));
    s.lx = bootstrap_mean_ci(lx, opts.resamples, opts.level, derive_seed(opts.seed, stream::kBootstrap, index++));

    const int f_max = group_f_max(groups, g.alpha, g.kind);
    const auto& ref = groups.at(GroupKey{g.alpha, static_cast<int>(g.kind), f_max});
    const Pairs p = pair_repeats(g, ref);
    auto rld_ci = [&](double StudyRow::*field) {
      return bootstrap_ci(
          p.size(), [&](std::span<const std::size_t> idx) { return rld_of(p, idx, field); }, opts.resamples,
          opts.level, derive_seed(opts.seed, stream::kBootstrap, index++));
    };
    s.rld_total = rld_ci(&StudyRow::best_total);
    s.rld_la = rld_ci(&StudyRow::best_la);
    s.rld_lx = rld_ci(&StudyRow::best_lx);
    out.push_back(s);
  }
  return out;
}

namespace {

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope needs at least two distinct alphas");
  return sxy / sxx;
}

}  // namespace

ConfidenceInterval rld_slope_ci(const std::vector<StudyRow>& rows, ModelKind kind, int f_total,
                                const SummaryOptions& opts) {
  const auto groups = group_rows(rows);
  std::vector<double> alphas;
  std::vector<Pairs> per_alpha;
  for (const auto& [k, g] : groups) {
    if (g.kind != kind || g.f_total != f_total) continue;
    const int f_max = group_f_max(groups, g.alpha, kind);
    alphas.push_back(g.alpha);
    per_alpha.push_back(pair_repeats(g, groups.at(GroupKey{g.alpha, static_cast<int>(kind), f_max})));
  }
  if (alphas.size() < 2) throw std::invalid_argument("slope needs at least two alphas");

  auto slope_for = [&](const std::vector<std::vector<std::size_t>>& idx) {
    std::vector<double> y;
    for (std::size_t a = 0; a < alphas.size(); ++a) y.push_back(rld_of(per_alpha[a], idx[a], &StudyRow::best_total));
    return ols_slope(alphas, y);
  };
  std::vector<std::vector<std::size_t>> idx(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    idx[a].resize(per_alpha[a].size());
    for (std::size_t i = 0; i < idx[a].size(); ++i) idx[a][i] = i;
  }
  const double estimate = slope_for(idx);

  Rng rng(derive_seed(opts.seed, stream::kBootstrap, 1'000'000 + static_cast<std::uint64_t>(f_total)));
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(opts.resamples));
  for (int b = 0; b < opts.resamples; ++b) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      std::uniform_int_distribution<std::size_t> pick(0, per_alpha[a].size() - 1);
      for (auto& v : idx[a]) v = pick(rng);
    }
    draws.push_back(slope_for(idx));
  }
  return percentile_interval(std::move(draws), estimate, opts.level);
}

}  // namespace an2vec
