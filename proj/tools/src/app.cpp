#include "an2vec/cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "an2vec/checkpoint.hpp"
#include "an2vec/classify.hpp"
#include "an2vec/datasets.hpp"
#include "an2vec/io.hpp"
#include "an2vec/linkpred.hpp"
#include "an2vec/study.hpp"
#include "an2vec/cli/benchmark_grid.hpp"
#include "an2vec/cli/config.hpp"
#include "an2vec/cli/gradcheck.hpp"
#include "an2vec/cli/manifest.hpp"

namespace an2vec::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kGuardTolerance = 1e-4;

struct Streams {
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;

  std::ostream& log() const {
    static std::ostream null(nullptr);
    return quiet ? null : err;
  }
};

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
      throw UsageError(where + ": unknown key '" + k + "'");
}

// Sets j[path...] = v when the option was given on the command line.
template <class T>
void set_if(json& j, const CLI::Option* opt, std::initializer_list<const char*> path, const T& v) {
  if (opt->count() == 0) return;
  json* node = &j;
  for (const char* p : path) node = &(*node)[p];
  *node = v;
}

// Runs `body`, then writes the manifest whatever happened; runtime
// failures are recorded in it before they propagate.
template <class F>
int with_manifest(RunManifest& m, const fs::path& out_dir, F&& body) {
  const Stopwatch clock;
  auto finish = [&] {
    m.wall_seconds = clock.seconds();
    m.peak_rss_bytes = peak_rss_bytes();
    write_manifest(out_dir, m);
  };
  try {
    fs::create_directories(out_dir);
    const int code = body();
    if (code != kExitOk && m.status == "ok") m.status = "failed";
    finish();
    return code;
  } catch (const std::exception& e) {
    m.status = "failed";
    m.error = e.what();
    finish();
    throw;
  }
}

// --------------------------------------------------------------------------
// Data loading shared by train, eval and grad-check.

struct DataSource {
  std::string path;
  std::string dataset;  // empty: generated graph directory
};

struct LoadedData {
  FeaturedGraph graph;
  bool named = false;
  std::string description;
};

LoadedData load_data(const DataSource& src) {
  LoadedData d;
  if (src.dataset.empty()) {
    d.graph = load_featured_graph(src.path);
    d.description = src.path;
  } else {
    CitationDataset ds;
    try {
      ds = load_named_dataset(src.dataset, src.path);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    d.graph = std::move(ds.graph);
    d.named = true;
    d.description = src.dataset + ":" + src.path;
  }
  return d;
}

void add_data_options(CLI::App* sub, DataSource& src, bool required) {
  auto* o = sub->add_option("--data", src.path, "Graph directory, or dataset directory with --dataset");
  if (required) o->required();
  sub->add_option("--dataset", src.dataset, "Named citation dataset: cora, citeseer, pubmed")
      ->check(CLI::IsMember({"cora", "citeseer", "pubmed"}));
}

// --------------------------------------------------------------------------
// Train-config flags shared by train and grad-check.

struct TrainFlags {
  std::string config, preset;
  int f_a = 0, f_ax = 0, f_x = 0, per_task = 0, epochs = 0, k = 0, hidden_enc = 0, hidden_dec = 0;
  double lr = 0.0, test_frac = 0.0;
  std::uint64_t seed = 0;
  std::string decoder, head, holdout, target;
  bool no_mean_loss = false, renormalize = false;
  std::map<std::string, CLI::Option*> opts;
};

void add_train_options(CLI::App* sub, TrainFlags& f) {
  auto& o = f.opts;
  o["config"] = sub->add_option("--config", f.config, "JSON config file (flags take precedence)");
  o["preset"] = sub->add_option("--preset", f.preset, "full (default) or citation");
  o["f_a"] = sub->add_option("--f-a", f.f_a, "Adjacency-only embedding dimensions");
  o["f_ax"] = sub->add_option("--f-ax", f.f_ax, "Shared embedding dimensions");
  o["f_x"] = sub->add_option("--f-x", f.f_x, "Feature-only embedding dimensions");
  o["per_task"] = sub->add_option("--per-task", f.per_task, "Dimensions per task; sets F_A = F_X = per_task - F_AX");
  o["epochs"] = sub->add_option("--epochs", f.epochs, "Training epochs");
  o["k"] = sub->add_option("--k", f.k, "Embedding samples per epoch");
  o["lr"] = sub->add_option("--lr", f.lr, "Adam learning rate");
  o["seed"] = sub->add_option("--seed", f.seed, "Master seed");
  o["decoder"] = sub->add_option("--decoder", f.decoder, "Adjacency decoder: deep or shallow");
  o["head"] = sub->add_option("--feature-head", f.head, "auto, multinomial, bernoulli or gaussian");
  o["hidden_enc"] = sub->add_option("--hidden-enc", f.hidden_enc, "Encoder hidden width");
  o["hidden_dec"] = sub->add_option("--hidden-dec", f.hidden_dec, "Decoder hidden widths");
  o["target"] = sub->add_option("--feature-target", f.target, "What the feature decoder reconstructs: as_is or one_hot");
  o["holdout"] = sub->add_option("--holdout", f.holdout, "Hold out test data for eval: none, linkpred, nodeclass");
  o["test_frac"] = sub->add_option("--test-frac", f.test_frac, "Held-out fraction of edges or nodes");
  o["no_mean_loss"] = sub->add_flag("--no-mean-loss", f.no_mean_loss, "Skip the per-epoch loss at ξ = μ");
  o["renormalize"] = sub->add_flag("--renormalize-features", f.renormalize, "Rescale feature rows to unit sum");
}

json train_flag_layer(const TrainFlags& f) {
  json j = json::object();
  const auto& o = f.opts;
  set_if(j, o.at("f_a"), {"train", "split", "f_a"}, f.f_a);
  set_if(j, o.at("f_ax"), {"train", "split", "f_ax"}, f.f_ax);
  set_if(j, o.at("f_x"), {"train", "split", "f_x"}, f.f_x);
  set_if(j, o.at("per_task"), {"per_task"}, f.per_task);
  set_if(j, o.at("epochs"), {"train", "epochs"}, f.epochs);
  set_if(j, o.at("k"), {"train", "k_samples"}, f.k);
  set_if(j, o.at("lr"), {"train", "lr"}, f.lr);
  set_if(j, o.at("seed"), {"seed"}, f.seed);
  set_if(j, o.at("decoder"), {"train", "decoder"}, f.decoder);
  set_if(j, o.at("head"), {"train", "feature_head"}, f.head);
  set_if(j, o.at("hidden_enc"), {"train", "hidden_enc"}, f.hidden_enc);
  set_if(j, o.at("hidden_dec"), {"train", "hidden_dec"}, f.hidden_dec);
  set_if(j, o.at("target"), {"train", "feature_target"}, f.target);
  set_if(j, o.at("holdout"), {"holdout", "task"}, f.holdout);
  set_if(j, o.at("test_frac"), {"holdout", "test_frac"}, f.test_frac);
  set_if(j, o.at("no_mean_loss"), {"train", "track_mean_loss"}, false);
  set_if(j, o.at("renormalize"), {"train", "renormalize_features"}, true);
  return j;
}

struct ResolvedTrain {
  json config;  // echoed into the manifest
  TrainConfig train;
  Holdout holdout;  // task "none" when nothing is held out
  bool auto_head = false;
};

ResolvedTrain resolve_train(const TrainFlags& f) {
  const json preset = f.preset.empty() ? json::object() : train_preset(f.preset);
  const json file = f.config.empty() ? json::object() : read_config_file(f.config);
  const json explicit_layers = merge_layers({file, train_flag_layer(f)});
  ResolvedTrain r;
  r.config = merge_layers({train_defaults(), preset, explicit_layers});
  if (!f.preset.empty()) r.config["preset"] = f.preset;
  require_keys(r.config, {"seed", "train", "per_task", "holdout", "preset"}, "train config");
  resolve_split(r.config, explicit_layers);
  r.train = train_config_from_json(r.config["train"]);
  try {
    r.train.seed = r.config.at("seed").get<std::uint64_t>();
  } catch (const json::exception&) {
    throw UsageError("seed must be a non-negative integer");
  }
  r.auto_head = r.config["train"]["feature_head"] == "auto";

  const json& h = r.config["holdout"];
  require_keys(h, {"task", "test_frac"}, "holdout");
  r.holdout.task = h.value("task", std::string("none"));
  r.holdout.test_frac = h.value("test_frac", 0.15);
  if (r.holdout.task != "none" && r.holdout.task != "linkpred" && r.holdout.task != "nodeclass")
    throw UsageError("holdout must be none, linkpred or nodeclass");
  if (!(r.holdout.test_frac > 0.0 && r.holdout.test_frac < 1.0)) throw UsageError("test-frac must lie in (0, 1)");
  r.holdout.split_seed = derive_seed(r.train.seed, stream::kSplit);
  return r;
}

void resolve_head(ResolvedTrain& r, const LoadedData& d) {
  if (!r.auto_head) return;
  r.train.head = d.named ? feature_head_for(d.graph.features) : FeatureHead::multinomial;
  r.config["train"]["feature_head"] = std::string(to_string(r.train.head));
}

json report_json(const GradCheckCase& c) {
  return {{"variant", c.variant},
          {"nodes", c.nodes},
          {"max_rel_error", c.report.max_rel_error},
          {"worst", c.report.worst},
          {"checked", c.report.checked},
          {"skipped_kinks", c.report.skipped_kinks}};
}

// --------------------------------------------------------------------------
// generate

struct GenerateFlags {
  std::string out, config, preset;
  int m = 0, n = 0;
  double p_in = 0, p_out = 0, alpha = 0, noise_sigma = 0;
  std::uint64_t seed = 0;
  std::map<std::string, CLI::Option*> opts;
};

int cmd_generate(const GenerateFlags& f, const std::vector<std::string>& argv, const Streams& io) {
  json flags = json::object();
  const auto& o = f.opts;
  set_if(flags, o.at("m"), {"sbm", "m"}, f.m);
  set_if(flags, o.at("n"), {"sbm", "n"}, f.n);
  set_if(flags, o.at("p_in"), {"sbm", "p_in"}, f.p_in);
  set_if(flags, o.at("p_out"), {"sbm", "p_out"}, f.p_out);
  set_if(flags, o.at("alpha"), {"alpha"}, f.alpha);
  set_if(flags, o.at("noise_sigma"), {"noise_sigma"}, f.noise_sigma);
  set_if(flags, o.at("seed"), {"seed"}, f.seed);
  json cfg = merge_layers({generate_defaults(), f.preset.empty() ? json() : generate_preset(f.preset),
                           f.config.empty() ? json() : read_config_file(f.config), flags});
  require_keys(cfg, {"sbm", "alpha", "noise_sigma", "seed"}, "generate config");
  const SbmConfig sbm = sbm_config_from_json(cfg["sbm"]);
  FeatureConfig fc;
  std::uint64_t seed = 0;
  try {
    fc.alpha = cfg.at("alpha").get<double>();
    fc.noise_sigma = cfg.at("noise_sigma").get<double>();
    seed = cfg.at("seed").get<std::uint64_t>();
    fc.validate();
  } catch (const json::exception& e) {
    throw UsageError(std::string("generate config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  RunManifest m;
  m.command = "generate";
  m.argv = argv;
  m.config = cfg;
  m.seed = seed;
  return with_manifest(m, f.out, [&] {
    const FeaturedGraph g = generate_featured_graph(sbm, fc, seed);
    const GraphFiles files = save_featured_graph(f.out, g);
    m.artifacts = {files.edges, files.features, files.labels};
    io.log() << "generated " << g.node_count() << " nodes, " << g.adjacency.edge_count() << " edges, "
             << g.feature_count() << " features -> " << f.out << '\n';
    return kExitOk;
  });
}

// --------------------------------------------------------------------------
// train

struct TrainCommand {
  DataSource data;
  std::string out;
  bool grad_check = false;
  TrainFlags flags;
};

int cmd_train(TrainCommand& c, const std::vector<std::string>& argv, const Streams& io) {
  ResolvedTrain r = resolve_train(c.flags);
  const fs::path out = c.out;
  RunManifest m;
  m.command = "train";
  m.argv = argv;
  m.seed = r.train.seed;
  m.config = r.config;
  return with_manifest(m, out, [&]() -> int {
    const LoadedData data = load_data(c.data);
    resolve_head(r, data);
    m.config = r.config;
    m.config["data"] = {{"path", c.data.path}, {"dataset", c.data.dataset}};

    if (c.grad_check) {
      const GradCheckCase gc = grad_check_config(data.graph, r.train);
      write_json(out / "gradcheck.json", report_json(gc));
      m.artifacts.push_back(out / "gradcheck.json");
      io.log() << "gradient check on " << gc.nodes << " nodes: max relative error " << gc.report.max_rel_error
               << " at " << gc.report.worst << '\n';
      if (!(gc.report.max_rel_error <= kGuardTolerance)) {
        io.err << "error: gradient check failed (" << gc.report.max_rel_error << " > " << kGuardTolerance
               << "); refusing to train\n";
        m.status = "refused";
        return kExitRuntime;
      }
    }

    SparseAdjacency a = data.graph.adjacency;
    DenseMatrix x = r.train.renormalize_features ? renormalize_rows(data.graph.features) : data.graph.features;
    std::optional<Holdout> holdout;
    if (r.holdout.task == "linkpred") {
      a = split_edges(data.graph.adjacency, r.holdout.test_frac, r.holdout.split_seed).train_adjacency;
      holdout = r.holdout;
    } else if (r.holdout.task == "nodeclass") {
      if (!data.graph.labels) throw std::runtime_error("node-classification holdout needs labelled data");
      const NodeSplit s = split_nodes(data.graph.node_count(), r.holdout.test_frac, r.holdout.split_seed);
      a = induced_subgraph(data.graph.adjacency, s.train_nodes);
      DenseMatrix sub(static_cast<Eigen::Index>(s.train_nodes.size()), x.cols());
      for (std::size_t k = 0; k < s.train_nodes.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = x.row(s.train_nodes[k]);
      x = std::move(sub);
      holdout = r.holdout;
    }

    const fs::path trace_path = out / "trace.csv";
    std::ofstream trace(trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) throw std::runtime_error("cannot write " + trace_path.string());
    write_trace_header(trace);
    m.artifacts.push_back(trace_path);
    const int report_every = std::max(1, r.train.epochs / 10);
    auto on_epoch = [&](const EpochRecord& e) {
      write_trace_row(trace, e);
      trace.flush();
      if (e.epoch % report_every == 0 || e.epoch == r.train.epochs)
        io.log() << "epoch " << e.epoch << "  total " << e.loss.total << "  L_A " << e.loss.l_a_scaled << "  L_X "
                 << e.loss.l_x_scaled << '\n';
    };

    TrainResult result;
    try {
      result = train(training_inputs(a, x, r.train), r.train, on_epoch);
    } catch (const TrainingDiverged& d) {
      io.err << "error: " << d.what() << "; trace kept in " << trace_path.string() << '\n';
      m.status = "diverged";
      m.error = d.what();
      return kExitRuntime;
    }

    Checkpoint ck;
    ck.weights = std::move(result.weights);
    ck.loss = r.train.loss;
    ck.master_seed = r.train.seed;
    ck.init_seed = derive_seed(r.train.seed, stream::kInit);
    ck.noise_seed = derive_seed(r.train.seed, stream::kNoise);
    ck.data_source = data.description;
    ck.renormalize_features = r.train.renormalize_features;
    ck.epochs_trained = static_cast<int>(result.trace.epochs.size());
    ck.holdout = holdout;
    save_checkpoint(out / "checkpoint.json", ck);
    m.artifacts.push_back(out / "checkpoint.json");
    io.out << "best total " << result.trace.best_total << " at epoch " << result.trace.best_epoch << '\n';
    return kExitOk;
  });
}

// --------------------------------------------------------------------------
// eval

struct EvalCommand {
  DataSource data;
  std::string checkpoint, task, out;
  double test_frac = 0.0;
  bool export_embeddings = false;
  CLI::Option* test_frac_opt = nullptr;
};

int cmd_eval(const EvalCommand& c, const std::vector<std::string>& argv, const Streams& io) {
  RunManifest m;
  m.command = "eval";
  m.argv = argv;
  m.config = {{"checkpoint", c.checkpoint},
              {"task", c.task},
              {"data", {{"path", c.data.path}, {"dataset", c.data.dataset}}},
              {"export_embeddings", c.export_embeddings}};
  if (c.test_frac_opt->count()) m.config["test_frac"] = c.test_frac;
  const fs::path out = c.out;
  return with_manifest(m, out, [&]() -> int {
    const Checkpoint ck = load_checkpoint(c.checkpoint);
    m.seed = ck.master_seed;
    const LoadedData data = load_data(c.data);
    if (data.graph.feature_count() != ck.weights.shape.n_features) {
      throw std::runtime_error("dataset has " + std::to_string(data.graph.feature_count()) +
                               " features but the checkpoint expects " + std::to_string(ck.weights.shape.n_features));
    }
    if (!ck.holdout) {
      throw std::runtime_error("checkpoint was trained on the full graph; train with --holdout " + c.task);
    }
    if (ck.holdout->task != c.task) {
      throw std::runtime_error("checkpoint holds out data for " + ck.holdout->task + ", not " + c.task);
    }
    if (c.test_frac_opt->count() && c.test_frac != ck.holdout->test_frac) {
      throw std::runtime_error("checkpoint was trained with test-frac " + format_real(ck.holdout->test_frac));
    }
    const DenseMatrix x = ck.renormalize_features ? renormalize_rows(data.graph.features) : data.graph.features;

    json metrics = {{"task", c.task}, {"test_frac", ck.holdout->test_frac}, {"checkpoint", c.checkpoint}};
    DenseMatrix mu;
    if (c.task == "linkpred") {
      const EdgeSplit split = split_edges(data.graph.adjacency, ck.holdout->test_frac, ck.holdout->split_seed);
      const EdgeScores sc = score_edges(ck.weights, x, split);
      const RankingResult rr = rank_metrics(sc.scores, sc.labels);
      metrics["auc"] = rr.auc;
      metrics["ap"] = rr.ap;
      metrics["test_pairs"] = sc.scores.size();
      if (c.export_embeddings) mu = embed_mean(ck.weights, split.train_adjacency, x);
      io.out << "auc " << rr.auc << "  ap " << rr.ap << '\n';
    } else {
      if (!data.graph.labels) throw std::runtime_error("node classification needs labelled data");
      const NodeSplit split = split_nodes(data.graph.node_count(), ck.holdout->test_frac, ck.holdout->split_seed);
      mu = embed_mean(ck.weights, data.graph.adjacency, x);
      const auto res = node_classification(mu, *data.graph.labels, split.train_nodes, split.test_nodes);
      metrics["f1"] = res.f1;
      metrics["train_nodes"] = split.train_nodes.size();
      metrics["test_nodes"] = split.test_nodes.size();
      metrics["missing_classes"] = res.missing_classes;
      io.out << "f1 " << res.f1 << '\n';
    }
    write_json(out / "metrics.json", metrics);
    m.artifacts.push_back(out / "metrics.json");
    if (c.export_embeddings) {
      write_embeddings_csv(out / "embeddings.csv", mu);
      m.artifacts.push_back(out / "embeddings.csv");
    }
    return kExitOk;
  });
}

// --------------------------------------------------------------------------
// sweep

struct SweepCommand {
  std::string grid, preset, out;
  int jobs = 1;
  int resamples = 2000;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

json overlap_defaults() {
  json j = an2vec::to_json(StudyConfig{});
  j["kind"] = "overlap";
  j["train"].erase("seed");
  j["train"].erase("split");
  // Sweeps record best losses only.
  j["train"]["track_mean_loss"] = false;
  // Colour rows are reconstructed as their one-hot category.
  j["train"]["feature_target"] = "one_hot";
  return j;
}

json overlap_preset(const std::string& name) {
  if (name == "full") return json::object();
  if (name == "desk") {
    return {{"sbm", {{"m", 50}}}, {"alphas", {0.0, 0.5, 1.0}}, {"repeats", 5}, {"train", {{"epochs", 500}}}};
  }
  throw UsageError("unknown sweep preset '" + name + "' (full, desk)");
}

// Prepares out/results.csv for appending: an earlier run's rows are kept
// only if it was the same grid.
template <class Row, class Reader, class Writer>
std::vector<Row> resume_rows(const fs::path& out, const json& grid, Reader read, Writer write_header_and_rows) {
  const fs::path grid_path = out / "grid.json";
  const fs::path results = out / "results.csv";
  std::vector<Row> rows;
  if (fs::exists(grid_path)) {
    if (read_json(grid_path) != grid) {
      throw std::runtime_error(out.string() + " holds a different sweep; choose another --out");
    }
    if (fs::exists(results)) {
      std::ifstream in(results, std::ios::binary);
      rows = read(in);
    }
  }
  write_json(grid_path, grid);
  std::ofstream w(results, std::ios::binary | std::ios::trunc);
  if (!w) throw std::runtime_error("cannot write " + results.string());
  write_header_and_rows(w, rows);
  return rows;
}

int run_overlap_sweep(const json& cfg, const SweepCommand& c, RunManifest& m, const Streams& io) {
  json study_json = cfg;
  study_json.erase("preset");
  const StudyConfig study = study_config_from_json(study_json);
  const fs::path out = c.out;
  m.seed = study.seed;
  return with_manifest(m, out, [&] {
    const auto completed = resume_rows<StudyRow>(
        out, cfg, [](std::istream& in) { return read_study_csv(in); },
        [](std::ostream& w, const std::vector<StudyRow>& rows) {
          write_study_header(w);
          for (const auto& r : rows) write_study_row(w, r);
        });
    const std::size_t total = study_cells(study).size();
    io.log() << "overlap sweep: " << total << " cells, " << completed.size() << " already done\n";

    std::ofstream append(out / "results.csv", std::ios::binary | std::ios::app);
    std::size_t done = completed.size();
    StudyOptions opts;
    opts.jobs = c.jobs;
    opts.completed = completed;
    opts.on_row = [&](const StudyRow& r) {
      write_study_row(append, r);
      append.flush();
      ++done;
      io.log() << "[" << done << "/" << total << "] alpha " << r.alpha << " " << to_string(r.kind) << " F "
               << r.f_total << " repeat " << r.repeat << " best " << r.best_total << '\n';
    };
    const auto rows = run_overlap_study(study, opts);
    append.close();

    std::ofstream canon(out / "results.csv", std::ios::binary | std::ios::trunc);
    write_study_header(canon);
    for (const auto& r : rows) write_study_row(canon, r);
    canon.close();

    const SummaryOptions so{c.resamples, 0.95, derive_seed(study.seed, stream::kBootstrap)};
    std::ofstream summary(out / "summary.csv", std::ios::binary | std::ios::trunc);
    write_summary_csv(summary, summarize_study(rows, so));
    m.artifacts = {out / "grid.json", out / "results.csv", out / "summary.csv"};

    if (study.alphas.size() >= 2) {
      std::ofstream slopes(out / "slopes.csv", std::ios::binary | std::ios::trunc);
      slopes << "kind,f_total,slope,slope_lo,slope_hi\n";
      for (ModelKind kind : {ModelKind::overlap, ModelKind::reference}) {
        const auto splits = kind == ModelKind::overlap ? overlap_splits(study.f_max) : reference_splits(study.f_max);
        for (const auto& s : splits) {
          if (s.total() == study.f_max) continue;
          const auto ci = rld_slope_ci(rows, kind, s.total(), so);
          slopes << to_string(kind) << ',' << s.total() << ',' << format_real(ci.estimate) << ','
                 << format_real(ci.lower) << ',' << format_real(ci.upper) << '\n';
        }
      }
      m.artifacts.push_back(out / "slopes.csv");
    }
    m.config["cells"] = total;
    m.config["resumed_cells"] = completed.size();
    return kExitOk;
  });
}

int run_benchmark_sweep(const json& cfg, const SweepCommand& c, RunManifest& m, const Streams& io) {
  const BenchmarkGrid grid = benchmark_grid_from_json(cfg);
  const fs::path out = c.out;
  m.seed = grid.seed;
  return with_manifest(m, out, [&] {
    const LoadedData data = load_data({grid.data.string(), grid.dataset});
    const auto completed = resume_rows<BenchmarkRow>(
        out, cfg, [](std::istream& in) { return read_benchmark_csv(in); },
        [](std::ostream& w, const std::vector<BenchmarkRow>& rows) {
          write_benchmark_header(w);
          for (const auto& r : rows) write_benchmark_row(w, r);
        });
    const std::size_t total = benchmark_cells(grid).size();
    io.log() << grid.task << " sweep: " << total << " cells, " << completed.size() << " already done\n";

    std::ofstream append(out / "results.csv", std::ios::binary | std::ios::app);
    std::size_t done = completed.size();
    GridOptions opts;
    opts.jobs = c.jobs;
    opts.completed = completed;
    opts.on_row = [&](const BenchmarkRow& r) {
      write_benchmark_row(append, r);
      append.flush();
      ++done;
      io.log() << "[" << done << "/" << total << "] " << to_string(r.decoder) << " per-task " << r.per_task
               << " f_ax " << r.f_ax << " test " << r.test_frac << " repeat " << r.repeat << '\n';
    };
    const auto rows = run_benchmark_grid(grid, data.graph, opts);
    append.close();

    std::ofstream canon(out / "results.csv", std::ios::binary | std::ios::trunc);
    write_benchmark_header(canon);
    for (const auto& r : rows) write_benchmark_row(canon, r);
    canon.close();
    std::ofstream summary(out / "summary.csv", std::ios::binary | std::ios::trunc);
    write_benchmark_summary_csv(summary,
                                summarize_benchmark(rows, c.resamples, 0.95, derive_seed(grid.seed, stream::kBootstrap)));
    m.artifacts = {out / "grid.json", out / "results.csv", out / "summary.csv"};
    m.config["cells"] = total;
    m.config["resumed_cells"] = completed.size();
    return kExitOk;
  });
}

int cmd_sweep(const SweepCommand& c, const std::vector<std::string>& argv, const Streams& io) {
  if (c.grid.empty() && c.preset.empty()) throw UsageError("sweep needs --grid or --preset");
  if (c.jobs < 1) throw UsageError("--jobs must be >= 1");
  if (c.resamples < 1) throw UsageError("--resamples must be >= 1");
  json file = c.grid.empty() ? json::object() : read_config_file(c.grid);
  json flags = json::object();
  if (c.seed_opt->count()) flags["seed"] = c.seed;

  RunManifest m;
  m.command = "sweep";
  m.argv = argv;
  const std::string kind = file.value("kind", std::string("overlap"));
  if (kind == "benchmark") {
    if (!c.preset.empty()) throw UsageError("--preset applies to overlap sweeps only");
    const json cfg = merge_layers({benchmark_grid_defaults(), file, flags});
    m.config = cfg;
    return run_benchmark_sweep(cfg, c, m, io);
  }
  if (kind != "overlap") throw UsageError("grid.kind must be overlap or benchmark");
  std::string preset = c.preset;
  if (preset.empty() && file.contains("preset")) preset = file.value("preset", std::string());
  file.erase("preset");
  json cfg = merge_layers({overlap_defaults(), preset.empty() ? json() : overlap_preset(preset), file, flags});
  if (!preset.empty()) cfg["preset"] = preset;
  m.config = cfg;
  return run_overlap_sweep(cfg, c, m, io);
}

// --------------------------------------------------------------------------
// grad-check

struct GradCheckCommand {
  DataSource data;
  std::string out;
  int instances = 20;
  double tolerance = 1e-5;
  int max_nodes = 10;
  TrainFlags flags;
};

int cmd_grad_check(GradCheckCommand& c, const std::vector<std::string>& argv, const Streams& io) {
  if (c.instances < 1) throw UsageError("--instances must be >= 1");
  if (!(c.tolerance > 0.0)) throw UsageError("--tol must be positive");
  RunManifest m;
  m.command = "grad-check";
  m.argv = argv;
  auto body = [&]() -> int {
    json report;
    double worst = 0.0;
    if (c.data.path.empty()) {
      const std::uint64_t seed = c.flags.opts.at("seed")->count() ? c.flags.seed : 0;
      m.seed = seed;
      m.config = {{"instances", c.instances}, {"tolerance", c.tolerance}, {"seed", seed}};
      const GradCheckSuite suite = run_grad_check_suite(c.instances, seed);
      report = {{"max_rel_error", suite.max_rel_error}, {"worst", suite.worst}, {"cases", json::array()}};
      for (const auto& gc : suite.cases) {
        report["cases"].push_back(report_json(gc));
        io.out << gc.variant << "  N=" << gc.nodes << "  max rel err " << gc.report.max_rel_error << "  ("
               << gc.report.checked << " checked, " << gc.report.skipped_kinks << " at kinks)\n";
      }
      worst = suite.max_rel_error;
    } else {
      ResolvedTrain r = resolve_train(c.flags);
      const LoadedData data = load_data(c.data);
      resolve_head(r, data);
      m.seed = r.train.seed;
      m.config = r.config;
      m.config["tolerance"] = c.tolerance;
      const GradCheckCase gc = grad_check_config(data.graph, r.train, c.max_nodes);
      report = report_json(gc);
      io.out << gc.variant << "  N=" << gc.nodes << "  max rel err " << gc.report.max_rel_error << " at "
             << gc.report.worst << '\n';
      worst = gc.report.max_rel_error;
    }
    const bool ok = worst < c.tolerance;
    io.out << (ok ? "PASS" : "FAIL") << ": max relative error " << worst << " (tolerance " << c.tolerance << ")\n";
    if (!c.out.empty()) {
      write_json(fs::path(c.out) / "gradcheck.json", report);
      m.artifacts.push_back(fs::path(c.out) / "gradcheck.json");
    }
    return ok ? kExitOk : kExitRuntime;
  };
  if (c.out.empty()) return body();
  return with_manifest(m, c.out, body);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"an2vec: overlapping multitask graph variational autoencoder", "an2vec"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  GenerateFlags gen;
  auto* g = app.add_subcommand("generate", "Sample a featured stochastic block model graph");
  g->add_option("--out", gen.out, "Output directory")->required();
  gen.opts["config"] = g->add_option("--config", gen.config, "JSON config file");
  gen.opts["preset"] = g->add_option("--preset", gen.preset, "full (M = 100) or desk (M = 50)");
  gen.opts["m"] = g->add_option("--m", gen.m, "Number of communities");
  gen.opts["n"] = g->add_option("--n", gen.n, "Nodes per community");
  gen.opts["p_in"] = g->add_option("--p-in", gen.p_in, "Within-community edge probability");
  gen.opts["p_out"] = g->add_option("--p-out", gen.p_out, "Between-community edge probability");
  gen.opts["alpha"] = g->add_option("--alpha", gen.alpha, "Fraction of nodes whose colour follows the community");
  gen.opts["noise_sigma"] = g->add_option("--noise-sigma", gen.noise_sigma, "Feature noise standard deviation");
  gen.opts["seed"] = g->add_option("--seed", gen.seed, "Seed");

  TrainCommand tr;
  auto* t = app.add_subcommand("train", "Train a model and write a checkpoint and loss trace");
  add_data_options(t, tr.data, true);
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_flag("--grad-check", tr.grad_check, "Check gradients on a shrunken copy first");
  add_train_options(t, tr.flags);

  EvalCommand ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on its held-out data");
  add_data_options(e, ev.data, true);
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint written by train")->required();
  e->add_option("--task", ev.task, "linkpred or nodeclass")->required()->check(CLI::IsMember({"linkpred", "nodeclass"}));
  ev.test_frac_opt = e->add_option("--test-frac", ev.test_frac, "Must match the checkpoint's holdout");
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_flag("--export-embeddings", ev.export_embeddings, "Write the μ rows as embeddings.csv");

  SweepCommand sw;
  auto* s = app.add_subcommand("sweep", "Run a resumable grid of training runs");
  s->add_option("--grid", sw.grid, "Grid file (JSON)");
  s->add_option("--preset", sw.preset, "Overlap grid preset: full or desk");
  s->add_option("--out", sw.out, "Output directory")->required();
  s->add_option("--jobs", sw.jobs, "Cells run concurrently");
  s->add_option("--resamples", sw.resamples, "Bootstrap resamples for the summary");
  sw.seed_opt = s->add_option("--seed", sw.seed, "Overrides the grid seed");

  GradCheckCommand gc;
  auto* k = app.add_subcommand("grad-check", "Compare analytic and finite-difference gradients");
  add_data_options(k, gc.data, false);
  k->add_option("--out", gc.out, "Output directory for the report");
  k->add_option("--instances", gc.instances, "Random instances when no data is given");
  k->add_option("--tol", gc.tolerance, "Maximum relative error");
  k->add_option("--max-nodes", gc.max_nodes, "Size of the shrunken copy of --data");
  add_train_options(k, gc.flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    if (pe.get_exit_code() == 0) return app.exit(pe, out, err);
    err << "error: " << pe.what() << '\n';
    return kExitUsage;
  }

  const Streams io{out, err, quiet};
  try {
    if (*g) return cmd_generate(gen, args, io);
    if (*t) return cmd_train(tr, args, io);
    if (*e) return cmd_eval(ev, args, io);
    if (*s) return cmd_sweep(sw, args, io);
    if (*k) return cmd_grad_check(gc, args, io);
  } catch (const UsageError& ue) {
    err << "error: " << ue.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace an2vec::cli
