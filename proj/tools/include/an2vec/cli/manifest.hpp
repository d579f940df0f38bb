#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace an2vec::cli {

/// Written once per run into the output directory. Only wall_seconds and
/// peak_rss_bytes vary between identical invocations.
struct RunManifest {
  static constexpr int kSchemaVersion = 1;

  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::uint64_t peak_rss_bytes = 0;  // 0 when the platform does not report it
  std::vector<std::filesystem::path> artifacts;
  std::string status = "ok";
  std::string error;
};

nlohmann::json to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

/// Peak resident set size of this process, best effort.
std::uint64_t peak_rss_bytes();

std::string code_version();

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace an2vec::cli
