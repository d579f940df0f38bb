#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "an2vec/loss.hpp"
#include "an2vec/model.hpp"

namespace an2vec {

/// What was held out of training, so evaluation can rebuild the same split.
struct Holdout {
  std::string task;  // "linkpred" or "nodeclass"
  double test_frac = 0.0;
  std::uint64_t split_seed = 0;
};

struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  ModelWeights weights;
  LossConfig loss;
  std::uint64_t master_seed = 0;
  std::uint64_t init_seed = 0;   // derived stream seeds, recorded for lineage
  std::uint64_t noise_seed = 0;
  std::string data_source;       // dataset path or generator description
  bool renormalize_features = false;
  int epochs_trained = 0;
  std::optional<Holdout> holdout;
};

nlohmann::json matrix_to_json(const DenseMatrix& m);
DenseMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace an2vec
