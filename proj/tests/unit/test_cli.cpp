#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "an2vec/classify.hpp"
#include "an2vec/io.hpp"
#include "an2vec/linkpred.hpp"
#include "an2vec/cli/app.hpp"

using namespace an2vec;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("an2vec_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.push_back("--quiet");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// A small graph shared by the train and eval tests.
fs::path small_graph(const TempDir& dir) {
  const fs::path g = dir / "graph";
  const auto r = run_cli({"generate", "--m", "6", "--n", "8", "--p-in", "0.5", "--p-out", "0.02", "--alpha", "0.9",
                      "--seed", "4", "--out", g.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  return g;
}

}  // namespace

TEST(CliGenerate, WritesDataAndManifest) {
  TempDir dir;
  const auto r = run_cli({"generate", "--m", "100", "--n", "10", "--p-in", "0.25", "--p-out", "0.01", "--alpha", "0.8",
                      "--seed", "1", "--out", (dir / "g").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"edges.txt", "features.csv", "labels.csv", "manifest.json"}) EXPECT_TRUE(fs::exists(dir / "g" / f)) << f;
  const auto m = manifest(dir / "g");
  EXPECT_EQ(m["command"], "generate");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["seed"], 1);
  EXPECT_EQ(m["config"]["sbm"]["m"], 100);
  EXPECT_EQ(m["config"]["alpha"], 0.8);
  EXPECT_EQ(m["artifacts"].size(), 3u);
  EXPECT_GE(m["wall_seconds"].get<double>(), 0.0);
  EXPECT_TRUE(m.contains("peak_rss_bytes"));
  EXPECT_TRUE(m.contains("code_version"));
  const auto g = load_featured_graph(dir / "g");
  EXPECT_EQ(g.node_count(), 1000);
  EXPECT_EQ(g.feature_count(), 100);
}

TEST(CliGenerate, SameFlagsGiveIdenticalBytes) {
  TempDir dir;
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(run_cli({"generate", "--m", "20", "--alpha", "0.5", "--seed", "7", "--out", (dir / out).string()}).code, 0);
  }
  for (const char* f : {"edges.txt", "features.csv", "labels.csv"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  ASSERT_EQ(run_cli({"generate", "--m", "20", "--alpha", "0.5", "--seed", "8", "--out", (dir / "c").string()}).code, 0);
  EXPECT_NE(slurp(dir / "a" / "edges.txt"), slurp(dir / "c" / "edges.txt"));
}

TEST(CliGenerate, UsageErrorsExitTwo) {
  TempDir dir;
  const auto out = (dir / "g").string();
  EXPECT_EQ(run_cli({"generate", "--alpha", "1.5", "--out", out}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--p-in", "0.01", "--p-out", "0.2", "--out", out}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--m", "0", "--out", out}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--bogus", "--out", out}).code, 2);
  EXPECT_EQ(run_cli({"generate", "--preset", "huge", "--out", out}).code, 2);
  EXPECT_EQ(run_cli({"generate"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_FALSE(fs::exists(dir / "g" / "edges.txt"));
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"train", "--help"}).code, 0);
}

TEST(CliGenerate, PresetThenConfigThenFlags) {
  TempDir dir;
  std::ofstream(dir / "cfg.json") << R"({"sbm": {"n": 4}, "alpha": 0.3})";
  ASSERT_EQ(run_cli({"generate", "--preset", "desk", "--config", (dir / "cfg.json").string(), "--alpha", "0.6", "--out",
                 (dir / "g").string()})
                .code,
            0);
  const auto c = manifest(dir / "g")["config"];
  EXPECT_EQ(c["sbm"]["m"], 50);   // preset
  EXPECT_EQ(c["sbm"]["n"], 4);    // config over preset
  EXPECT_EQ(c["alpha"], 0.6);     // flag over config
  EXPECT_EQ(load_featured_graph(dir / "g").node_count(), 200);
  std::ofstream(dir / "bad.json") << R"({"sbm": {"q": 1}})";
  EXPECT_EQ(run_cli({"generate", "--config", (dir / "bad.json").string(), "--out", (dir / "h").string()}).code, 2);
}

TEST(CliTrain, DefaultsMatchTheSyntheticSetup) {
  TempDir dir;
  const auto g = small_graph(dir);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "2", "--out", (dir / "t").string()}).code, 0);
  const auto t = manifest(dir / "t")["config"]["train"];
  EXPECT_EQ(t["lr"], 0.01);
  EXPECT_EQ(t["k_samples"], 5);
  EXPECT_EQ(t["hidden_enc"], 50);
  EXPECT_EQ(t["hidden_dec"], 50);
  EXPECT_EQ(t["feature_head"], "multinomial");
  EXPECT_EQ(TrainConfig{}.epochs, 1000);
  for (const char* f : {"trace.csv", "checkpoint.json", "manifest.json"}) EXPECT_TRUE(fs::exists(dir / "t" / f)) << f;
  EXPECT_EQ(line_count(dir / "t" / "trace.csv"), 3u);
}

TEST(CliTrain, CitationPresetAndPerTaskWidths) {
  TempDir dir;
  const auto g = small_graph(dir);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--preset", "citation", "--f-ax", "16", "--epochs", "1", "--out",
                 (dir / "a").string()})
                .code,
            0);
  const auto a = manifest(dir / "a")["config"]["train"];
  EXPECT_EQ(a["hidden_enc"], 32);
  EXPECT_EQ(a["hidden_dec"], 32);
  EXPECT_EQ(a["split"], (nlohmann::json{{"f_a", 0}, {"f_ax", 16}, {"f_x", 0}}));

  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--preset", "citation", "--epochs", "1", "--out", (dir / "b").string()}).code, 0);
  const auto b = manifest(dir / "b")["config"]["train"];
  EXPECT_EQ(b["split"], (nlohmann::json{{"f_a", 16}, {"f_ax", 0}, {"f_x", 16}}));
  EXPECT_EQ(b["epochs"], 1);

  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--preset", "citation", "--f-ax", "4", "--f-a", "2", "--epochs", "1",
                 "--out", (dir / "c").string()})
                .code,
            0);
  EXPECT_EQ(manifest(dir / "c")["config"]["train"]["split"], (nlohmann::json{{"f_a", 2}, {"f_ax", 4}, {"f_x", 12}}));
  EXPECT_EQ(run_cli({"train", "--data", g.string(), "--per-task", "4", "--f-ax", "6", "--out", (dir / "d").string()}).code, 2);
}

TEST(CliTrain, FlagsBeatConfigBeatsPreset) {
  TempDir dir;
  const auto g = small_graph(dir);
  std::ofstream(dir / "cfg.json") << R"({"train": {"epochs": 4, "hidden_enc": 7}, "seed": 3})";
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--preset", "citation", "--config", (dir / "cfg.json").string(),
                 "--epochs", "2", "--out", (dir / "t").string()})
                .code,
            0);
  const auto c = manifest(dir / "t")["config"];
  EXPECT_EQ(c["train"]["epochs"], 2);
  EXPECT_EQ(c["train"]["hidden_enc"], 7);
  EXPECT_EQ(c["train"]["hidden_dec"], 32);
  EXPECT_EQ(c["seed"], 3);
  EXPECT_EQ(line_count(dir / "t" / "trace.csv"), 3u);
}

TEST(CliTrain, FeatureTargetFlagAndConfigKey) {
  TempDir dir;
  const auto g = small_graph(dir);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "2", "--out", (dir / "d").string()}).code, 0);
  EXPECT_EQ(manifest(dir / "d")["config"]["train"]["feature_target"], "as_is");
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "2", "--feature-target", "one_hot", "--out",
                     (dir / "f").string()})
                .code,
            0);
  EXPECT_EQ(manifest(dir / "f")["config"]["train"]["feature_target"], "one_hot");
  std::ofstream(dir / "cfg.json") << R"({"train": {"feature_target": "one_hot"}})";
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "2", "--config", (dir / "cfg.json").string(),
                     "--out", (dir / "c").string()})
                .code,
            0);
  EXPECT_EQ(slurp(dir / "f" / "trace.csv"), slurp(dir / "c" / "trace.csv"));
  EXPECT_NE(slurp(dir / "d" / "trace.csv"), slurp(dir / "f" / "trace.csv"));
  EXPECT_EQ(run_cli({"train", "--data", g.string(), "--feature-target", "hot", "--out", (dir / "x").string()}).code,
            2);
  std::ofstream(dir / "bad.json") << R"({"train": {"feature_target": 1}})";
  EXPECT_EQ(run_cli({"train", "--data", g.string(), "--config", (dir / "bad.json").string(), "--out",
                     (dir / "y").string()})
                .code,
            2);
}

TEST(CliTrain, RepeatedRunsAreBitwiseIdentical) {
  TempDir dir;
  const auto g = small_graph(dir);
  for (const char* out : {"a", "b"})
    ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "5", "--seed", "9", "--f-ax", "2", "--out",
                   (dir / out).string()})
                  .code,
              0);
  EXPECT_EQ(slurp(dir / "a" / "trace.csv"), slurp(dir / "b" / "trace.csv"));
  EXPECT_EQ(slurp(dir / "a" / "checkpoint.json"), slurp(dir / "b" / "checkpoint.json"));
  auto ma = manifest(dir / "a"), mb = manifest(dir / "b");
  for (auto* m : {&ma, &mb}) {
    m->erase("wall_seconds");
    m->erase("peak_rss_bytes");
    m->erase("argv");
    m->erase("artifacts");
  }
  EXPECT_EQ(ma, mb);
}

TEST(CliTrain, DivergenceKeepsThePartialTrace) {
  TempDir dir;
  const auto g = small_graph(dir);
  const auto r = run_cli({"train", "--data", g.string(), "--epochs", "50", "--lr", "1e200", "--feature-head", "gaussian",
                      "--out", (dir / "t").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("non-finite"), std::string::npos) << r.err;
  const auto m = manifest(dir / "t");
  EXPECT_EQ(m["status"], "diverged");
  EXPECT_FALSE(fs::exists(dir / "t" / "checkpoint.json"));
  const std::size_t lines = line_count(dir / "t" / "trace.csv");
  EXPECT_GE(lines, 2u);
  EXPECT_LT(lines, 51u);
}

TEST(CliTrain, GradientGuardRuns) {
  TempDir dir;
  const auto g = small_graph(dir);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "1", "--grad-check", "--f-ax", "2", "--out",
                 (dir / "t").string()})
                .code,
            0);
  const auto report = nlohmann::json::parse(slurp(dir / "t" / "gradcheck.json"));
  EXPECT_LT(report["max_rel_error"].get<double>(), 1e-4);
  EXPECT_LE(report["nodes"].get<int>(), 10);
  EXPECT_GT(report["checked"].get<int>(), 0);
}

TEST(CliTrain, MissingDataIsARuntimeFailure) {
  TempDir dir;
  EXPECT_EQ(run_cli({"train", "--data", (dir / "nowhere").string(), "--out", (dir / "t").string()}).code, 1);
  EXPECT_EQ(manifest(dir / "t")["status"], "failed");
  EXPECT_EQ(run_cli({"train", "--data", (dir / "x").string(), "--decoder", "wide", "--out", (dir / "u").string()}).code, 2);
  EXPECT_EQ(run_cli({"train", "--data", (dir / "x").string(), "--holdout", "both", "--out", (dir / "u").string()}).code, 2);
}

TEST(CliEval, LinkPredictionMatchesTheLibraryProtocol) {
  TempDir dir;
  const auto g = small_graph(dir);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "30", "--seed", "5", "--holdout", "linkpred", "--out",
                 (dir / "t").string()})
                .code,
            0);
  ASSERT_EQ(run_cli({"eval", "--checkpoint", (dir / "t" / "checkpoint.json").string(), "--data", g.string(), "--task",
                 "linkpred", "--test-frac", "0.15", "--export-embeddings", "--out", (dir / "e").string()})
                .code,
            0);
  const auto metrics = nlohmann::json::parse(slurp(dir / "e" / "metrics.json"));

  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 5;
  const auto lib = run_link_prediction(load_featured_graph(g), 0.15, cfg, derive_seed(5, stream::kSplit));
  EXPECT_EQ(metrics["auc"].get<double>(), lib.metrics.auc);
  EXPECT_EQ(metrics["ap"].get<double>(), lib.metrics.ap);

  std::ifstream emb(dir / "e" / "embeddings.csv");
  const DenseMatrix mu = read_matrix_csv(emb, true);
  EXPECT_EQ(mu.rows(), 48);
  EXPECT_EQ(mu.cols(), 1 + cfg.split.total());
  EXPECT_EQ(slurp(dir / "e" / "embeddings.csv").substr(0, 15), "node,mu_0,mu_1,");
}

TEST(CliEval, NodeClassificationMatchesTheLibraryProtocol) {
  TempDir dir;
  const auto g = small_graph(dir);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "20", "--seed", "2", "--holdout", "nodeclass",
                 "--test-frac", "0.25", "--out", (dir / "t").string()})
                .code,
            0);
  ASSERT_EQ(run_cli({"eval", "--checkpoint", (dir / "t" / "checkpoint.json").string(), "--data", g.string(), "--task",
                 "nodeclass", "--out", (dir / "e").string()})
                .code,
            0);
  const auto metrics = nlohmann::json::parse(slurp(dir / "e" / "metrics.json"));
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 2;
  const auto lib = run_node_classification(load_featured_graph(g), 0.25, cfg, derive_seed(2, stream::kSplit));
  EXPECT_EQ(metrics["f1"].get<double>(), lib.result.f1);
  EXPECT_EQ(metrics["test_nodes"], 12);
}

TEST(CliEval, MismatchesAreRejected) {
  TempDir dir;
  const auto g = small_graph(dir);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "1", "--out", (dir / "full").string()}).code, 0);
  ASSERT_EQ(run_cli({"train", "--data", g.string(), "--epochs", "1", "--holdout", "linkpred", "--out", (dir / "lp").string()}).code, 0);
  const auto ck_full = (dir / "full" / "checkpoint.json").string(), ck_lp = (dir / "lp" / "checkpoint.json").string();
  const auto out = (dir / "e").string();
  EXPECT_EQ(run_cli({"eval", "--checkpoint", ck_full, "--data", g.string(), "--task", "linkpred", "--out", out}).code, 1);
  EXPECT_EQ(run_cli({"eval", "--checkpoint", ck_lp, "--data", g.string(), "--task", "nodeclass", "--out", out}).code, 1);
  EXPECT_EQ(run_cli({"eval", "--checkpoint", ck_lp, "--data", g.string(), "--task", "linkpred", "--test-frac", "0.9",
                 "--out", out})
                .code,
            1);
  ASSERT_EQ(run_cli({"generate", "--m", "3", "--n", "4", "--out", (dir / "other").string()}).code, 0);
  EXPECT_EQ(run_cli({"eval", "--checkpoint", ck_lp, "--data", (dir / "other").string(), "--task", "linkpred", "--out", out}).code, 1);
  EXPECT_EQ(run_cli({"eval", "--checkpoint", ck_lp, "--data", g.string(), "--task", "ranking", "--out", out}).code, 2);
}

namespace {

void write_overlap_grid(const fs::path& p, int seed) {
  std::ofstream(p) << R"({"kind": "overlap", "sbm": {"m": 3, "n": 5, "p_in": 0.6, "p_out": 0.05},
    "alphas": [0, 1], "f_max": 4, "repeats": 2, "seed": )"
                   << seed << R"(, "train": {"epochs": 4, "hidden_enc": 6, "hidden_dec": 6}})";
}

}  // namespace

TEST(CliSweep, OverlapGridWritesLongAndSummaryCsv) {
  TempDir dir;
  write_overlap_grid(dir / "grid.json", 1);
  ASSERT_EQ(run_cli({"sweep", "--grid", (dir / "grid.json").string(), "--out", (dir / "s").string()}).code, 0);
  const auto rows = read_study_csv(dir / "s" / "results.csv");
  // 2 kinds × 2 widths × 2 alphas × 2 repeats.
  EXPECT_EQ(rows.size(), 16u);
  EXPECT_TRUE(fs::exists(dir / "s" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "s" / "slopes.csv"));
  EXPECT_EQ(line_count(dir / "s" / "summary.csv"), 1u + 2u * 2u * 2u);
  EXPECT_EQ(manifest(dir / "s")["config"]["cells"], 16);
  EXPECT_EQ(manifest(dir / "s")["config"]["train"]["feature_target"], "one_hot");
}

TEST(CliSweep, InterruptedSweepRunsOnlyMissingCells) {
  TempDir dir;
  write_overlap_grid(dir / "grid.json", 2);
  const auto grid = (dir / "grid.json").string();
  ASSERT_EQ(run_cli({"sweep", "--grid", grid, "--out", (dir / "full").string()}).code, 0);
  const std::string full = slurp(dir / "full" / "results.csv");

  // Keep the header, nine rows and half of the tenth.
  std::size_t cut = 0;
  for (int i = 0; i < 10; ++i) cut = full.find('\n', cut) + 1;
  cut += 12;
  fs::create_directories(dir / "part");
  fs::copy_file(dir / "full" / "grid.json", dir / "part" / "grid.json");
  std::ofstream(dir / "part" / "results.csv", std::ios::binary) << full.substr(0, cut);

  ASSERT_EQ(run_cli({"sweep", "--grid", grid, "--out", (dir / "part").string(), "--jobs", "2"}).code, 0);
  EXPECT_EQ(manifest(dir / "part")["config"]["resumed_cells"], 9);
  EXPECT_EQ(slurp(dir / "part" / "results.csv"), full);
  EXPECT_EQ(slurp(dir / "part" / "summary.csv"), slurp(dir / "full" / "summary.csv"));

  // A different grid in the same directory is refused.
  write_overlap_grid(dir / "grid2.json", 3);
  EXPECT_EQ(run_cli({"sweep", "--grid", (dir / "grid2.json").string(), "--out", (dir / "part").string()}).code, 1);
}

TEST(CliSweep, BenchmarkGridOverTestSizes) {
  TempDir dir;
  const auto g = small_graph(dir);
  std::ofstream(dir / "grid.json") << R"({"kind": "benchmark", "task": "linkpred", "data": ")" << g.string()
                                   << R"(", "test_fracs": [0.1, 0.9], "per_task": [4], "overlaps": [0, 2, 4, 8],
    "decoders": ["shallow"], "repeats": 2, "train": {"epochs": 3, "hidden_enc": 8, "hidden_dec": 8}})";
  ASSERT_EQ(run_cli({"sweep", "--grid", (dir / "grid.json").string(), "--out", (dir / "s").string(), "--jobs", "2"}).code, 0);
  const std::string csv = slurp(dir / "s" / "results.csv");
  // Overlap 8 exceeds the per-task width and is skipped: 3 overlaps × 2 sizes × 2 repeats.
  EXPECT_EQ(line_count(dir / "s" / "results.csv"), 13u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "decoder,per_task,f_ax,test_frac,repeat,auc,ap,f1,best_total");
  EXPECT_EQ(line_count(dir / "s" / "summary.csv"), 7u);
}

TEST(CliSweep, BadGridsAreUsageErrors) {
  TempDir dir;
  const auto out = (dir / "s").string();
  std::ofstream(dir / "a.json") << "{not json";
  std::ofstream(dir / "b.json") << R"({"kind": "overlap", "alphas": [2]})";
  std::ofstream(dir / "c.json") << R"({"kind": "spiral"})";
  std::ofstream(dir / "d.json") << R"({"kind": "overlap", "f_max": 7})";
  std::ofstream(dir / "e.json") << R"({"kind": "benchmark", "data": "x", "test_fracs": [1.5]})";
  std::ofstream(dir / "f.json") << R"({"kind": "overlap", "colour": 1})";
  for (const char* f : {"a.json", "b.json", "c.json", "d.json", "e.json", "f.json"})
    EXPECT_EQ(run_cli({"sweep", "--grid", (dir / f).string(), "--out", out}).code, 2) << f;
  EXPECT_EQ(run_cli({"sweep", "--out", out}).code, 2);
  EXPECT_EQ(run_cli({"sweep", "--preset", "galactic", "--out", out}).code, 2);
}

TEST(CliSweep, PresetsHaveTheFullAndDeskShapes) {
  // Resolve without running: a bad --jobs value fails after config resolution.
  TempDir dir;
  EXPECT_EQ(run_cli({"sweep", "--preset", "desk", "--jobs", "0", "--out", (dir / "s").string()}).code, 2);
  std::ofstream(dir / "g.json") << R"({"preset": "desk", "repeats": 1, "alphas": [1], "f_max": 2,
    "sbm": {"m": 2, "n": 4, "p_in": 0.8}, "train": {"epochs": 2, "hidden_enc": 4, "hidden_dec": 4}})";
  ASSERT_EQ(run_cli({"sweep", "--grid", (dir / "g.json").string(), "--out", (dir / "s").string()}).code, 0);
  const auto c = manifest(dir / "s")["config"];
  EXPECT_EQ(c["preset"], "desk");
  EXPECT_EQ(c["sbm"]["m"], 2);
  EXPECT_EQ(c["sbm"]["p_out"], 0.01);
  EXPECT_EQ(c["train"]["k_samples"], 5);
}

TEST(CliGradCheck, SuiteAndTolerance) {
  TempDir dir;
  const auto r = run_cli({"grad-check", "--instances", "6", "--out", (dir / "g").string()});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "g" / "gradcheck.json"));
  EXPECT_EQ(report["cases"].size(), 6u);
  EXPECT_EQ(run_cli({"grad-check", "--instances", "2", "--tol", "1e-300"}).code, 1);
  EXPECT_EQ(run_cli({"grad-check", "--instances", "0"}).code, 2);
}
