#pragma once

#include <string>
#include <vector>

namespace perfospec {

/// Provenance record emitted for every CLI command. The config hash is a
/// FNV-1a digest of the canonical input bytes, stable across runs; the
/// timestamp honors SOURCE_DATE_EPOCH so reproducible runs emit identical
/// manifests.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string version;
  std::string timestamp;
  std::vector<std::string> outputs;
};

std::string fnv1a_hex(const std::string& data);

RunManifest make_manifest(const std::string& command, const std::string& config_bytes,
                          std::vector<std::string> outputs);

std::string manifest_to_json(const RunManifest& m);

}  // namespace perfospec
