#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/api/clock.hpp"
#include "sequela/api/config.hpp"
#include "sequela/cohort/cohort.hpp"
#include "sequela/ehr/record.hpp"
#include "sequela/logstore/logstore.hpp"
#include "sequela/pipeline/round_runner.hpp"
#include "sequela/projection/projection.hpp"
#include "sequela/sampling/sampling.hpp"

namespace sequela::api {

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// The single analyst session behind the HTTP routes.
struct SessionState {
  std::shared_ptr<const ehr::Corpus> corpus;
  projection::SchemaConfig schema_config;
  std::vector<std::string> feature_schema;
  cohort::CohortSelection selection;
  std::vector<std::string> feature_list;  // insertion order
  sampling::SampleSet draft;
  std::optional<projection::Layout> layout;
  std::uint64_t version = 0;
};

/// Transport-independent request dispatcher. Reads share a lock, mutations
/// take it exclusively, and training runs on one background worker.
class Service {
 public:
  explicit Service(ServiceConfig config, std::unique_ptr<Clock> clock = std::make_unique<SystemClock>());
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// `target` is the request path, e.g. "/logs/3". `body` is raw JSON text
  /// (may be empty for GET).
  Response handle(std::string_view method, std::string_view target, std::string_view body = {});

  /// Blocks until every queued training job has finished.
  void wait_idle();

  const ServiceConfig& config() const { return config_; }

  /// Route template for a concrete method and path ("GET /logs/{id}"), or
  /// nullopt when no route matches.
  static std::optional<std::string> route_key(std::string_view method, std::string_view path);

 private:
  struct Job {
    std::int64_t round_id = 0;
    std::shared_ptr<const ehr::Corpus> corpus;
    pipeline::TrainRequest request;
  };
  enum class JobState { queued, running, complete, failed };
  struct JobStatus {
    JobState state = JobState::queued;
    std::string reason;
  };

  Response dispatch(const std::string& route, const std::vector<std::string>& params, const nlohmann::json& body);

  Response health();
  Response load_corpus(const nlohmann::json& body);
  Response summary();
  Response cohort_filter(const nlohmann::json& body);
  Response cohort_channels();
  Response run_projection(const nlohmann::json& body);
  Response timeline(const std::string& patient_id);
  Response expand(const std::string& patient_id, const std::string& lane, const std::string& index);
  Response lasso(const nlohmann::json& body);
  Response features(const nlohmann::json& body);
  Response sample(const nlohmann::json& body);
  Response train(const nlohmann::json& body);
  Response round_status(const std::string& round);
  Response round_shap(const std::string& round);
  Response round_view(const std::string& round);
  Response logs();
  Response log_entry(const std::string& id);

  const ehr::Corpus& require_corpus() const;
  std::uint64_t bump_version();
  std::shared_ptr<const pipeline::RoundArtifacts> artifacts_for(std::int64_t round_id);
  static std::int64_t parse_round_id(const std::string& text);
  void worker_loop();

  ServiceConfig config_;
  std::unique_ptr<Clock> clock_;
  std::unique_ptr<logstore::LogStore> store_;

  mutable std::shared_mutex session_mutex_;
  SessionState state_;

  std::mutex jobs_mutex_;
  std::condition_variable jobs_cv_;
  std::deque<Job> queue_;
  std::map<std::int64_t, JobStatus> job_status_;
  std::map<std::int64_t, std::shared_ptr<const pipeline::RoundArtifacts>> artifacts_;
  std::int64_t next_round_id_ = 1;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace sequela::api
