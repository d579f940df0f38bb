#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "an2vec/study.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

namespace an2vec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, presets or config values. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Later layers win; nested objects merge key by key.
nlohmann::json merge_layers(const std::vector<nlohmann::json>& layers);

/// Reads a config file and requires a JSON object.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Strict readers: unknown keys and out-of-range values raise UsageError.
TrainConfig train_config_from_json(const nlohmann::json& j);
SbmConfig sbm_config_from_json(const nlohmann::json& j);
StudyConfig study_config_from_json(const nlohmann::json& j);

// Resolved config schema of `generate`:
//   {"sbm": {m, n, p_in, p_out}, "alpha", "noise_sigma", "seed"}
nlohmann::json generate_defaults();
nlohmann::json generate_preset(const std::string& name);

// Resolved config schema of `train`:
//   {"seed", "train": TrainConfig, "per_task", "holdout": {"task", "test_frac"}}
// train.feature_head may be "auto": the dataset mapping for named citation
// datasets, multinomial otherwise. per_task, when set, fills f_a and f_x as
// per_task - f_ax unless they are given explicitly.
nlohmann::json train_defaults();
nlohmann::json train_preset(const std::string& name);

/// Applies the per_task rule. `explicit_layers` is the merge of the config
/// file and flag layers only.
void resolve_split(nlohmann::json& resolved, const nlohmann::json& explicit_layers);

std::vector<std::string> preset_names(const std::string& command);

}  // namespace an2vec::cli
