#include "sequela/api/config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sequela/error.hpp"

namespace sequela::api {

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v) return std::nullopt;
  return std::string(v);
}

namespace {

template <typename T>
T parse_number(const std::string& text, const char* what) {
  try {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<T>(v);
  } catch (const std::exception&) {
    throw SpecError(std::string(what) + " must be a non-negative integer, got '" + text + "'");
  }
}

}  // namespace

ServiceConfig load_config(const std::optional<std::string>& config_file, const EnvLookup& env) {
  ServiceConfig c;
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw SpecError("cannot read config file " + *config_file);
    try {
      const auto j = nlohmann::json::parse(in);
      c.host = j.value("host", c.host);
      c.port = j.value("port", c.port);
      if (j.contains("corpus_path")) c.corpus_path = j.at("corpus_path").get<std::string>();
      c.log_dir = j.value("log_dir", c.log_dir);
      c.default_seed = j.value("default_seed", c.default_seed);
      if (j.contains("static_dir")) c.static_dir = j.at("static_dir").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw SpecError("bad config file " + *config_file + ": " + e.what());
    }
  }
  if (auto v = env("SEQUELA_HOST")) c.host = *v;
  if (auto v = env("SEQUELA_PORT")) c.port = parse_number<int>(*v, "SEQUELA_PORT");
  if (auto v = env("SEQUELA_CORPUS")) c.corpus_path = *v;
  if (auto v = env("SEQUELA_LOG_DIR")) c.log_dir = *v;
  if (auto v = env("SEQUELA_SEED")) c.default_seed = parse_number<std::uint64_t>(*v, "SEQUELA_SEED");
  if (auto v = env("SEQUELA_STATIC_DIR")) c.static_dir = *v;
  if (c.port < 0 || c.port > 65535) throw SpecError("port out of range");
  return c;
}

}  // namespace sequela::api
