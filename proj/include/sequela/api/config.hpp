#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace sequela::api {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> corpus_path;  // loaded at startup when set
  std::string log_dir = "sequela-logs";
  std::uint64_t default_seed = 0;  // used when a request omits its seed
  std::optional<std::string> static_dir;  // built web UI, served at /
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Reads the process environment.
std::optional<std::string> process_env(const char* name);

/// Defaults, then the JSON config file (if given), then the environment:
/// SEQUELA_HOST, SEQUELA_PORT, SEQUELA_CORPUS, SEQUELA_LOG_DIR, SEQUELA_SEED,
/// SEQUELA_STATIC_DIR. Throws SpecError on unreadable or invalid values.
ServiceConfig load_config(const std::optional<std::string>& config_file, const EnvLookup& env = process_env);

}  // namespace sequela::api
