#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>
#include <sfa/io.hpp>

// Run provenance. Every pipeline command appends its merged configuration,
// input hashes and outputs to manifest.json in the run directory, so a run
// can be reproduced from the manifest alone. Timestamps live only here,
// never in metrics files.

namespace sfa {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string file_hash(const std::string& path) {
  auto f = open_in(path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

inline std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  return format_iso8601(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()) + "Z";
}

inline nlohmann::json load_manifest(const std::string& run_dir) {
  const std::string path = run_dir + "/manifest.json";
  if (!std::filesystem::exists(path)) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["created_utc"] = utc_now_iso8601();
    return j;
  }
  auto f = open_in(path);
  nlohmann::json j;
  f >> j;
  return j;
}

inline void save_manifest(const std::string& run_dir, nlohmann::json manifest) {
  manifest["tool_version"] = kToolVersion;
  manifest["updated_utc"] = utc_now_iso8601();
  auto f = open_out(run_dir + "/manifest.json");
  f << manifest.dump(1) << "\n";
}

}  // namespace sfa
