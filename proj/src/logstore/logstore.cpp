#include "sequela/logstore/logstore.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>

#include "sequela/error.hpp"

namespace sequela::logstore {

namespace fs = std::filesystem;

namespace {

void sync_path(const fs::path& p) {
  const int fd = ::open(p.c_str(), O_RDONLY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

// Writes `text` to a temporary sibling, flushes it to disk, then renames it
// over `target`. Readers see either the old file or the complete new one.
void atomic_write(const fs::path& target, const std::string& text) {
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw StorageError("write failed for " + tmp.string());
  }
  sync_path(tmp);
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw StorageError("rename " + tmp.string() + " -> " + target.string() + ": " + ec.message());
  sync_path(target.parent_path());
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StorageError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw StorageError("corrupt round file " + p.string() + ": " + e.what());
  }
}

}  // namespace

std::string LogStore::round_file_name(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "round-%06lld.json", static_cast<long long>(id));
  return buf;
}

LogStore::LogStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "rounds", ec);
  if (ec) throw StorageError("cannot create log directory " + dir_.string() + ": " + ec.message());

  static const std::regex name(R"(round-(\d{6,})\.json)");
  for (const auto& entry : fs::directory_iterator(dir_ / "rounds")) {
    const auto file = entry.path().filename().string();
    std::smatch m;
    if (std::regex_match(file, m, name)) {
      auto round = model_round_from_json(read_json(entry.path()));
      if (round.round_id != std::stoll(m[1].str())) {
        throw StorageError("round file " + file + " holds round " + std::to_string(round.round_id));
      }
      summaries_.emplace(round.round_id, summarize(round));
    } else if (file.size() > 4 && file.compare(file.size() - 4, 4, ".tmp") == 0) {
      fs::remove(entry.path(), ec);  // interrupted write; the round never existed
    }
  }
  write_index();
}

std::int64_t LogStore::record_round(ModelRound round) {
  std::unique_lock lock(mutex_);
  round.round_id = summaries_.empty() ? 1 : summaries_.rbegin()->first + 1;
  atomic_write(dir_ / "rounds" / round_file_name(round.round_id), to_json(round).dump(2) + "\n");
  summaries_.emplace(round.round_id, summarize(round));
  write_index();
  return round.round_id;
}

std::vector<RoundSummary> LogStore::list_rounds() const {
  std::shared_lock lock(mutex_);
  std::vector<RoundSummary> out;
  for (const auto& [id, s] : summaries_) out.push_back(s);
  return out;
}

ModelRound LogStore::get_round(std::int64_t id) const {
  {
    std::shared_lock lock(mutex_);
    if (!summaries_.count(id)) throw NotFound("no round " + std::to_string(id));
  }
  return model_round_from_json(read_json(dir_ / "rounds" / round_file_name(id)));
}

void LogStore::write_index() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& [id, s] : summaries_) {
    auto entry = to_json(s);
    entry["file"] = "rounds/" + round_file_name(id);
    rounds.push_back(std::move(entry));
  }
  atomic_write(dir_ / "index.json", nlohmann::json{{"rounds", std::move(rounds)}}.dump(2) + "\n");
}

}  // namespace sequela::logstore
