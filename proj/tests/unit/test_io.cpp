#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <unistd.h>

#include "an2vec/checkpoint.hpp"
#include "an2vec/io.hpp"
#include "an2vec/optim.hpp"
#include "oracles.hpp"

using namespace an2vec;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("an2vec_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(FormatReal, RoundTripsExactly) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = g(rng) * std::pow(10.0, static_cast<double>(static_cast<int>(rng() % 40) - 20));
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
  EXPECT_EQ(format_real(0.5), "0.5");
  EXPECT_EQ(format_real(1.0), "1");
}

TEST(GraphFiles, RoundTrip) {
  TempDir dir;
  const auto g = generate_featured_graph({4, 5, 0.5, 0.1}, {0.5, 0.1}, 3);
  save_featured_graph(dir.path(), g);
  const auto h = load_featured_graph(dir.path());
  EXPECT_EQ(h.adjacency.edges(), g.adjacency.edges());
  EXPECT_EQ(h.features, g.features);
  EXPECT_EQ(*h.labels, *g.labels);
  EXPECT_EQ(*h.community, *g.community);
}

TEST(GraphFiles, SameGraphSameBytes) {
  TempDir a, b;
  save_featured_graph(a.path(), generate_featured_graph({3, 4, 0.5, 0.1}, {0.3, 0.1}, 8));
  save_featured_graph(b.path(), generate_featured_graph({3, 4, 0.5, 0.1}, {0.3, 0.1}, 8));
  for (const char* f : {kEdgesFile, kFeaturesFile, kLabelsFile})
    EXPECT_EQ(read_file(a.path() / f), read_file(b.path() / f)) << f;
}

TEST(MatrixCsv, RoundTripWithHeaderAndNaN) {
  std::mt19937_64 rng(2);
  DenseMatrix m = oracle::random_matrix(5, 3, rng);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  std::stringstream ss;
  write_matrix_csv(ss, m, {"a", "b", "c"});
  const DenseMatrix r = read_matrix_csv(ss, true);
  ASSERT_EQ(r.rows(), 5);
  ASSERT_EQ(r.cols(), 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == 1 && j == 1) EXPECT_TRUE(std::isnan(r(i, j)));
      else EXPECT_EQ(r(i, j), m(i, j));
    }
  std::stringstream bad("1,2\n3\n");
  EXPECT_THROW(read_matrix_csv(bad), ParseError);
}

TEST(TraceCsv, HeaderAndRows) {
  std::stringstream ss;
  write_trace_header(ss);
  EpochRecord r;
  r.epoch = 3;
  r.loss.l_a_scaled = 0.5;
  r.loss.l_x_scaled = 0.25;
  r.loss.l_kl_scaled = 0.125;
  r.loss.l_theta_scaled = 0.0625;
  r.loss.total = 0.9375;
  r.total_at_mean = 0.9;
  write_trace_row(ss, r);
  EXPECT_EQ(ss.str(),
            "epoch,l_a_scaled,l_x_scaled,l_kl_scaled,l_theta_scaled,total,total_at_mean\n"
            "3,0.5,0.25,0.125,0.0625,0.9375,0.9\n");
}

TEST(StudyCsv, RoundTripAndTruncatedTail) {
  std::vector<StudyRow> rows;
  for (int i = 0; i < 4; ++i) {
    StudyRow r;
    r.alpha = 0.25 * i;
    r.f_total = 20 - 2 * i;
    r.f_ax = 2 * i;
    r.kind = i % 2 ? ModelKind::reference : ModelKind::overlap;
    r.repeat = i;
    r.best_total = 1.0 / (i + 3);
    r.best_la = 0.1 * i;
    r.best_lx = 0.2 * i;
    r.auc = r.ap = r.f1 = std::numeric_limits<double>::quiet_NaN();
    if (i == 2) r.auc = 0.9, r.ap = 0.8, r.f1 = 0.7;
    rows.push_back(r);
  }
  std::stringstream ss;
  write_study_header(ss);
  for (const auto& r : rows) write_study_row(ss, r);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "alpha,f_total,f_ax,kind,repeat,best_total,best_la,best_lx,auc,ap,f1");

  std::stringstream in(text);
  const auto back = read_study_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].key(), rows[i].key());
    EXPECT_EQ(back[i].best_total, rows[i].best_total);
    EXPECT_EQ(std::isnan(back[i].auc), std::isnan(rows[i].auc));
  }
  EXPECT_EQ(back[2].f1, 0.7);

  // A run killed mid-write leaves a partial last line; it is ignored.
  std::stringstream cut(text.substr(0, text.size() - 7));
  EXPECT_EQ(read_study_csv(cut).size(), rows.size() - 1);
}

TEST(Json, WriteAndRead) {
  TempDir dir;
  nlohmann::json j;
  j["split"] = to_json(DimensionSplit{1, 2, 3});
  j["train"] = to_json(TrainConfig{});
  write_json(dir.path() / "x.json", j);
  EXPECT_EQ(read_json(dir.path() / "x.json"), j);
  EXPECT_EQ(j["split"]["f_ax"], 2);
  std::ofstream(dir.path() / "bad.json") << "{not json";
  EXPECT_THROW(read_json(dir.path() / "bad.json"), ParseError);
}

TEST(Checkpoint, RoundTripPreservesWeightsBitwise) {
  TempDir dir;
  ModelShape shape;
  shape.n_features = 6;
  shape.hidden_enc = 7;
  shape.hidden_dec = 5;
  shape.split = {2, 2, 2};
  shape.head = FeatureHead::bernoulli;
  Rng rng(9);
  Checkpoint c;
  c.weights = init_weights(shape, rng);
  c.master_seed = 12345678901234567ULL;
  c.data_source = "generated";
  c.epochs_trained = 10;
  c.holdout = Holdout{"linkpred", 0.15, 77};
  save_checkpoint(dir.path() / "ck.json", c);
  const auto d = load_checkpoint(dir.path() / "ck.json");
  EXPECT_EQ(d.master_seed, c.master_seed);
  EXPECT_EQ(d.weights.shape.split, shape.split);
  EXPECT_EQ(d.weights.shape.head, FeatureHead::bernoulli);
  ASSERT_TRUE(d.holdout.has_value());
  EXPECT_EQ(d.holdout->split_seed, 77u);
  const auto a = weight_matrices(c.weights.enc, c.weights.dec);
  const auto b = weight_matrices(d.weights.enc, d.weights.dec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_EQ(*a[m], *b[m]);
}

TEST(Checkpoint, RejectsShapeMismatch) {
  ModelShape shape;
  shape.n_features = 3;
  shape.split = {1, 0, 1};
  Rng rng(1);
  Checkpoint c;
  c.weights = init_weights(shape, rng);
  auto j = to_json(c);
  EXPECT_NO_THROW(checkpoint_from_json(j));
  auto bad = j;
  bad["matrices"]["enc.w0"] = matrix_to_json(DenseMatrix::Zero(2, 2));
  EXPECT_THROW(checkpoint_from_json(bad), ParseError);
  EXPECT_THROW(checkpoint_from_json(nlohmann::json::object()), ParseError);
}
