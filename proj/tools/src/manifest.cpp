#include "an2vec/cli/manifest.hpp"

#include <sys/resource.h>

#include "an2vec/io.hpp"

#ifndef AN2VEC_VERSION
#define AN2VEC_VERSION "unknown"
#endif

namespace an2vec::cli {

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& p : m.artifacts) artifacts.push_back(p.string());
  nlohmann::json j = {{"schema_version", RunManifest::kSchemaVersion},
                      {"command", m.command},
                      {"argv", m.argv},
                      {"config", m.config},
                      {"seed", m.seed},
                      {"wall_seconds", m.wall_seconds},
                      {"peak_rss_bytes", m.peak_rss_bytes},
                      {"artifacts", artifacts},
                      {"code_version", code_version()},
                      {"status", m.status}};
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::filesystem::create_directories(dir);
  write_json(dir / kManifestFile, to_json(m));
}

std::uint64_t peak_rss_bytes() {
  rusage ru{};
  if (getrusage(RUSAGE_SELF, &ru) != 0) return 0;
  // Linux reports ru_maxrss in kilobytes.
  return static_cast<std::uint64_t>(ru.ru_maxrss) * 1024u;
}

std::string code_version() { return AN2VEC_VERSION; }

}  // namespace an2vec::cli
