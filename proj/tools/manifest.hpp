// Run manifests written next to every CLI output.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qn::cli {

inline constexpr const char* kVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::string& path);

struct RunManifest {
  std::vector<std::string> command_line;
  nlohmann::json config;
  unsigned precision_bits = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  // Digests are taken when this is called, so call it after writing outputs.
  nlohmann::json to_json() const;
};

// Writes `path` and then `path.manifest.json`.
void write_with_manifest(const std::string& path, const std::string& content, RunManifest manifest);

}  // namespace qn::cli
