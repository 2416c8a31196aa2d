#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <shared_mutex>
#include <vector>

#include "sequela/logstore/round.hpp"

namespace sequela::logstore {

/// Append-only store: <dir>/rounds/round-NNNNNN.json per round plus
/// <dir>/index.json. Round files are the source of truth; the index is
/// rebuilt from them on open. Writes go through one mutex.
class LogStore {
 public:
  /// Creates the directory when missing. Throws StorageError.
  explicit LogStore(std::filesystem::path dir);

  /// Assigns the next id (ignoring round.round_id), persists the round with
  /// write-then-rename, and returns the id. Throws StorageError.
  std::int64_t record_round(ModelRound round);

  std::vector<RoundSummary> list_rounds() const;

  /// Throws NotFound.
  ModelRound get_round(std::int64_t round_id) const;

  const std::filesystem::path& dir() const { return dir_; }

  static std::string round_file_name(std::int64_t round_id);

 private:
  void write_index() const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::int64_t, RoundSummary> summaries_;
};

}  // namespace sequela::logstore
