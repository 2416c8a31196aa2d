#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sequela::test {

struct Step {
  std::string method;
  std::string path;
  int status = 0;
  nlohmann::json body;
};

/// Writes a seeded synthetic corpus to `dir`/corpus.json and returns its path.
std::filesystem::path write_corpus(const std::filesystem::path& dir, std::uint64_t seed, int n_patients);

/// Runs load -> filter -> project -> lasso -> features -> sample -> train ->
/// logs against a fresh service with a logical clock and its own log dir.
std::vector<Step> run_walkthrough(const std::filesystem::path& corpus_path, const std::filesystem::path& log_dir);

/// Empty when every response has a 2xx status, conforms to its schema, and
/// the versions carried by responses strictly increase. Otherwise the
/// first problem found.
std::string check_walkthrough(const std::vector<Step>& steps);

}  // namespace sequela::test
