#include "perfospec/manifest.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include <json.hpp>

#include "perfospec/version.hpp"

namespace perfospec {

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunManifest make_manifest(const std::string& command, const std::string& config_bytes,
                          std::vector<std::string> outputs) {
  RunManifest m;
  m.command = command;
  m.config_hash = fnv1a_hex(config_bytes);
  m.version = kVersion;
  std::time_t t;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  m.timestamp = buf;
  m.outputs = std::move(outputs);
  return m;
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["timestamp"] = m.timestamp;
  j["outputs"] = m.outputs;
  return j.dump(2);
}

}  // namespace perfospec
