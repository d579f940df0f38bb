#include "an2vec/cli/benchmark_grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "an2vec/classify.hpp"
#include "an2vec/datasets.hpp"
#include "an2vec/io.hpp"
#include "an2vec/linkpred.hpp"
#include "an2vec/cli/config.hpp"

namespace an2vec::cli {

namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string cell_key(AdjacencyDecoder d, int per_task, int f_ax, double test_frac, int repeat) {
  return std::string(to_string(d)) + "|" + std::to_string(per_task) + "|" + std::to_string(f_ax) + "|" +
         format_real(test_frac) + "|" + std::to_string(repeat);
}

}  // namespace

void BenchmarkGrid::validate() const {
  if (task != "linkpred" && task != "nodeclass") throw UsageError("grid.task must be linkpred or nodeclass");
  if (data.empty()) throw UsageError("grid.data: a dataset directory is required");
  if (test_fracs.empty() || per_task.empty() || decoders.empty()) throw UsageError("grid lists must not be empty");
  for (double f : test_fracs)
    if (!(f > 0.0 && f < 1.0)) throw UsageError("grid.test_fracs: values must lie in (0, 1)");
  for (int d : per_task)
    if (d < 1) throw UsageError("grid.per_task: widths must be >= 1");
  for (int o : overlaps)
    if (o < 0) throw UsageError("grid.overlaps: values must be >= 0");
  if (repeats < 1) throw UsageError("grid.repeats must be >= 1");
  if (benchmark_cells(*this).empty()) throw UsageError("grid has no cell with overlap <= per_task");
}

json benchmark_grid_defaults() {
  json t = to_json(TrainConfig{});
  t.erase("seed");
  t.erase("split");
  t.erase("decoder");
  t["epochs"] = 200;
  t["hidden_enc"] = 32;
  t["hidden_dec"] = 32;
  t["feature_head"] = "auto";
  t["track_mean_loss"] = false;
  return {{"kind", "benchmark"},          {"task", "linkpred"},   {"dataset", ""},
          {"data", ""},                   {"test_fracs", {0.15}}, {"per_task", {16}},
          {"overlaps", json::array()},    {"decoders", {"shallow", "deep"}},
          {"repeats", 10},                {"seed", 0},            {"train", t}};
}

BenchmarkGrid benchmark_grid_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("grid must be a JSON object");
  static const char* const kKeys[] = {"kind",     "task",     "dataset",  "data",  "test_fracs", "per_task",
                                      "overlaps", "decoders", "repeats", "seed",  "train"};
  for (const auto& [k, v] : j.items())
    if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* s) { return k == s; }) == std::end(kKeys))
      throw UsageError("grid: unknown key '" + k + "'");
  BenchmarkGrid g;
  try {
    g.task = j.value("task", g.task);
    g.dataset = j.value("dataset", g.dataset);
    g.data = j.value("data", std::string());
    g.test_fracs = j.value("test_fracs", g.test_fracs);
    g.per_task = j.value("per_task", g.per_task);
    g.overlaps = j.value("overlaps", g.overlaps);
    g.repeats = j.value("repeats", g.repeats);
    g.seed = j.value("seed", g.seed);
    if (j.contains("decoders")) {
      g.decoders.clear();
      for (const auto& d : j.at("decoders")) g.decoders.push_back(parse_adjacency_decoder(d.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("grid: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("grid: ") + e.what());
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    for (const char* k : {"split", "decoder", "seed"})
      if (t.contains(k)) throw UsageError(std::string("grid.train.") + k + " is set by the grid itself");
    g.train = train_config_from_json(t);
    g.auto_head = t.value("feature_head", std::string("auto")) == "auto";
  }
  g.validate();
  return g;
}

json to_json(const BenchmarkGrid& g) {
  json decoders = json::array();
  for (auto d : g.decoders) decoders.push_back(std::string(to_string(d)));
  json t = an2vec::to_json(g.train);
  for (const char* k : {"seed", "split", "decoder"}) t.erase(k);
  if (g.auto_head) t["feature_head"] = "auto";
  return {{"kind", "benchmark"},      {"task", g.task},         {"dataset", g.dataset},
          {"data", g.data.string()},  {"test_fracs", g.test_fracs}, {"per_task", g.per_task},
          {"overlaps", g.overlaps},   {"decoders", decoders},   {"repeats", g.repeats},
          {"seed", g.seed},           {"train", t}};
}

std::string BenchmarkCell::key() const { return cell_key(decoder, per_task, f_ax, test_frac, repeat); }
std::string BenchmarkRow::key() const { return cell_key(decoder, per_task, f_ax, test_frac, repeat); }

std::vector<BenchmarkCell> benchmark_cells(const BenchmarkGrid& g) {
  std::vector<BenchmarkCell> cells;
  for (auto d : g.decoders)
    for (int w : g.per_task) {
      std::vector<int> ov = g.overlaps.empty() ? std::vector<int>{0, w} : g.overlaps;
      for (int o : ov) {
        if (o > w) continue;
        for (std::size_t t = 0; t < g.test_fracs.size(); ++t)
          for (int r = 0; r < g.repeats; ++r) cells.push_back({d, w, o, static_cast<int>(t), g.test_fracs[t], r});
      }
    }
  return cells;
}

std::uint64_t benchmark_split_seed(const BenchmarkGrid& g, const BenchmarkCell& c) {
  return derive_seed(g.seed, stream::kSplit,
                     static_cast<std::uint64_t>(c.test_frac_index) * 100003u + static_cast<std::uint64_t>(c.repeat));
}

std::uint64_t benchmark_train_seed(const BenchmarkGrid& g, const BenchmarkCell& c) {
  return derive_seed(g.seed, stream::kTrain, static_cast<std::uint64_t>(c.repeat));
}

BenchmarkRow run_benchmark_cell(const BenchmarkGrid& g, const FeaturedGraph& data, const BenchmarkCell& c) {
  TrainConfig cfg = g.train;
  cfg.split = c.split();
  cfg.decoder = c.decoder;
  cfg.seed = benchmark_train_seed(g, c);
  if (g.auto_head) cfg.head = feature_head_for(data.features);

  BenchmarkRow row{c.decoder, c.per_task, c.f_ax, c.test_frac, c.repeat, kNaN, kNaN, kNaN, kNaN};
  if (g.task == "linkpred") {
    const auto r = run_link_prediction(data, c.test_frac, cfg, benchmark_split_seed(g, c));
    row.auc = r.metrics.auc;
    row.ap = r.metrics.ap;
    row.best_total = r.trace.best_total;
  } else {
    const auto r = run_node_classification(data, c.test_frac, cfg, benchmark_split_seed(g, c));
    row.f1 = r.result.f1;
    row.best_total = r.trace.best_total;
  }
  return row;
}

std::vector<BenchmarkRow> run_benchmark_grid(const BenchmarkGrid& g, const FeaturedGraph& data,
                                             const GridOptions& opts) {
  const auto cells = benchmark_cells(g);
  std::unordered_map<std::string, BenchmarkRow> done;
  for (const auto& r : opts.completed) done.emplace(r.key(), r);

  std::vector<std::optional<BenchmarkRow>> results(cells.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto it = done.find(cells[i].key());
    if (it != done.end()) results[i] = it->second;
    else todo.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= todo.size()) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        BenchmarkRow row = run_benchmark_cell(g, data, cells[todo[t]]);
        std::lock_guard lock(mu);
        results[todo[t]] = row;
        if (opts.on_row) opts.on_row(row);
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

  std::vector<BenchmarkRow> out;
  out.reserve(cells.size());
  for (auto& r : results) out.push_back(*r);
  return out;
}

void write_benchmark_header(std::ostream& out) { out << "decoder,per_task,f_ax,test_frac,repeat,auc,ap,f1,best_total\n"; }

void write_benchmark_row(std::ostream& out, const BenchmarkRow& r) {
  out << to_string(r.decoder) << ',' << r.per_task << ',' << r.f_ax << ',' << format_real(r.test_frac) << ','
      << r.repeat << ',' << format_cell(r.auc) << ',' << format_cell(r.ap) << ',' << format_cell(r.f1) << ','
      << format_cell(r.best_total) << '\n';
}

std::vector<BenchmarkRow> read_benchmark_csv(std::istream& in) {
  std::vector<BenchmarkRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty() || line == "\r") continue;
    if (in.eof()) break;  // unterminated final line of an interrupted run
    const std::string where = "benchmark csv line " + std::to_string(line_no);
    const auto f = split_csv(line);
    if (f.size() != 9) throw ParseError(where + ": expected 9 fields");
    BenchmarkRow r;
    try {
      r.decoder = parse_adjacency_decoder(f[0]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(where + ": " + e.what());
    }
    r.per_task = static_cast<int>(parse_int(f[1], where));
    r.f_ax = static_cast<int>(parse_int(f[2], where));
    r.test_frac = parse_real(f[3], where);
    r.repeat = static_cast<int>(parse_int(f[4], where));
    r.auc = parse_real(f[5], where);
    r.ap = parse_real(f[6], where);
    r.f1 = parse_real(f[7], where);
    r.best_total = parse_real(f[8], where);
    rows.push_back(r);
  }
  return rows;
}

std::vector<BenchmarkSummary> summarize_benchmark(const std::vector<BenchmarkRow>& rows, int resamples,
                                                  double level, std::uint64_t seed) {
  using Key = std::tuple<int, int, int, double>;
  std::map<Key, std::vector<const BenchmarkRow*>> groups;
  for (const auto& r : rows) groups[{static_cast<int>(r.decoder), r.per_task, r.f_ax, r.test_frac}].push_back(&r);

  std::vector<BenchmarkSummary> out;
  std::uint64_t index = 0;
  for (const auto& [k, members] : groups) {
    BenchmarkSummary s;
    s.decoder = members.front()->decoder;
    s.per_task = members.front()->per_task;
    s.f_ax = members.front()->f_ax;
    s.test_frac = members.front()->test_frac;
    s.n = static_cast<int>(members.size());
    auto ci = [&](double BenchmarkRow::*field) {
      std::vector<double> v;
      for (const auto* r : members) v.push_back(r->*field);
      if (std::any_of(v.begin(), v.end(), [](double x) { return std::isnan(x); })) return ConfidenceInterval{kNaN, kNaN, kNaN};
      return bootstrap_mean_ci(v, resamples, level, derive_seed(seed, stream::kBootstrap, index));
    };
    s.auc = ci(&BenchmarkRow::auc);
    s.ap = ci(&BenchmarkRow::ap);
    s.f1 = ci(&BenchmarkRow::f1);
    ++index;
    out.push_back(s);
  }
  return out;
}

void write_benchmark_summary_csv(std::ostream& out, const std::vector<BenchmarkSummary>& rows) {
  out << "decoder,per_task,f_ax,test_frac,n";
  for (const char* m : {"auc", "ap", "f1"}) out << ',' << m << "_mean," << m << "_lo," << m << "_hi";
  out << '\n';
  for (const auto& s : rows) {
    out << to_string(s.decoder) << ',' << s.per_task << ',' << s.f_ax << ',' << format_real(s.test_frac) << ','
        << s.n;
    for (const auto* ci : {&s.auc, &s.ap, &s.f1})
      out << ',' << format_cell(ci->estimate) << ',' << format_cell(ci->lower) << ',' << format_cell(ci->upper);
    out << '\n';
  }
}

}  // namespace an2vec::cli
