#include "sequela/api/service.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "sequela/api/lasso.hpp"
#include "sequela/api/schema.hpp"
#include "sequela/ehr/corpus_json.hpp"
#include "sequela/ehr/summary.hpp"
#include "sequela/error.hpp"
#include "sequela/model/shap.hpp"
#include "sequela/projection/features.hpp"
#include "sequela/projection/glyph.hpp"
#include "sequela/timeline/timeline.hpp"

namespace sequela::api {

using nlohmann::json;

namespace {

/// Malformed request body; `path` points at the offending field.
class BadRequest : public Error {
 public:
  BadRequest(std::string path, const std::string& message) : Error("BadRequest", message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class CorpusNotLoaded : public Error {
 public:
  CorpusNotLoaded() : Error("CorpusNotLoaded", "no corpus loaded; POST /corpus/load first") {}
};

class RoundUnavailable : public Error {
 public:
  RoundUnavailable(const std::string& code, const std::string& message) : Error(code, message) {}
};

struct RouteTemplate {
  std::string_view method;
  std::string_view pattern;
};

constexpr RouteTemplate kRoutes[] = {
    {"GET", "/health"},
    {"POST", "/corpus/load"},
    {"GET", "/summary"},
    {"POST", "/cohort/filter"},
    {"GET", "/cohort/channels"},
    {"POST", "/projection"},
    {"GET", "/patient/{id}/timeline"},
    {"GET", "/patient/{id}/timeline/{lane}/{index}"},
    {"POST", "/select/lasso"},
    {"POST", "/features"},
    {"POST", "/sampling"},
    {"POST", "/model/train"},
    {"GET", "/model/{round}/status"},
    {"GET", "/model/{round}/shap"},
    {"GET", "/model/{round}/view"},
    {"GET", "/logs"},
    {"GET", "/logs/{id}"},
};

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto j = path.find('/', i);
    const auto end = j == std::string_view::npos ? path.size() : j;
    out.push_back(path.substr(i, end - i));
    i = end;
  }
  return out;
}

std::optional<std::vector<std::string>> match(std::string_view pattern, std::string_view path) {
  const auto want = split_path(pattern);
  const auto got = split_path(path);
  if (want.size() != got.size()) return std::nullopt;
  std::vector<std::string> params;
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].front() == '{') {
      params.emplace_back(got[i]);
    } else if (want[i] != got[i]) {
      return std::nullopt;
    }
  }
  return params;
}

json error_body(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

std::string state_name(int s) {
  static const char* names[] = {"queued", "running", "complete", "failed"};
  return names[s];
}

template <typename T>
T get_or(const json& body, const char* key, T fallback) {
  return body.contains(key) ? body.at(key).get<T>() : fallback;
}

}  // namespace

Service::Service(ServiceConfig config, std::unique_ptr<Clock> clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  store_ = std::make_unique<logstore::LogStore>(config_.log_dir);
  const auto rounds = store_->list_rounds();
  next_round_id_ = rounds.empty() ? 1 : rounds.back().round_id + 1;
  state_.draft.rng_seed = config_.default_seed;
  worker_ = std::thread([this] { worker_loop(); });
  if (config_.corpus_path) {
    const auto r = handle("POST", "/corpus/load", json{{"path", *config_.corpus_path}}.dump());
    if (r.status != 200) throw Error(r.body["error"]["code"].get<std::string>(), r.body["error"]["message"].get<std::string>());
  }
}

Service::~Service() {
  {
    std::lock_guard lock(jobs_mutex_);
    stopping_ = true;
  }
  jobs_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

std::optional<std::string> Service::route_key(std::string_view method, std::string_view path) {
  for (const auto& r : kRoutes) {
    if (r.method == method && match(r.pattern, path)) return std::string(r.method) + " " + std::string(r.pattern);
  }
  return std::nullopt;
}

Response Service::handle(std::string_view method, std::string_view target, std::string_view body_text) {
  const auto path = target.substr(0, target.find('?'));
  std::optional<std::string> route;
  std::vector<std::string> params;
  for (const auto& r : kRoutes) {
    if (r.method != method) continue;
    if (auto p = match(r.pattern, path)) {
      route = std::string(r.method) + " " + std::string(r.pattern);
      params = std::move(*p);
      break;
    }
  }
  if (!route) return {404, error_body("NotFound", "no route for " + std::string(method) + " " + std::string(path))};

  json body = json::object();
  if (method == "POST" && !body_text.empty()) {
    try {
      body = json::parse(body_text);
    } catch (const json::parse_error& e) {
      json err = error_body("BadRequest", std::string("body is not valid JSON: ") + e.what());
      err["error"]["path"] = "";
      return {400, err};
    }
  }
  if (auto v = ApiSchema::builtin().check_request(*route, body)) {
    json err = error_body("BadRequest", "request body violates '" + v->keyword + "' at '" + v->path + "'");
    err["error"]["path"] = v->path;
    return {400, err};
  }

  try {
    return dispatch(*route, params, body);
  } catch (const BadRequest& e) {
    json err = error_body(e.code(), e.what());
    err["error"]["path"] = e.path();
    return {400, err};
  } catch (const NotFound& e) {
    return {404, error_body(e.code(), e.what())};
  } catch (const SchemaError& e) {
    json err = error_body(e.code(), e.what());
    err["error"]["path"] = e.path();
    return {422, err};
  } catch (const InvariantError& e) {
    json err = error_body(e.code(), e.what());
    err["error"]["patient_ids"] = e.patient_ids();
    return {422, err};
  } catch (const Error& e) {
    return {422, error_body(e.code(), e.what())};
  } catch (const json::exception& e) {
    return {400, error_body("BadRequest", e.what())};
  } catch (const std::exception& e) {
    return {500, error_body("InternalError", e.what())};
  }
}

Response Service::dispatch(const std::string& route, const std::vector<std::string>& p, const json& body) {
  if (route == "POST /model/train") return train(body);
  if (route == "GET /model/{round}/status") return round_status(p[0]);
  if (route == "GET /model/{round}/shap") return round_shap(p[0]);
  if (route == "GET /model/{round}/view") return round_view(p[0]);
  if (route == "GET /logs") return logs();
  if (route == "GET /logs/{id}") return log_entry(p[0]);

  if (route.rfind("GET ", 0) == 0) {
    std::shared_lock lock(session_mutex_);
    if (route == "GET /health") return health();
    if (route == "GET /summary") return summary();
    if (route == "GET /cohort/channels") return cohort_channels();
    if (route == "GET /patient/{id}/timeline") return timeline(p[0]);
    if (route == "GET /patient/{id}/timeline/{lane}/{index}") return expand(p[0], p[1], p[2]);
  } else {
    std::unique_lock lock(session_mutex_);
    if (route == "POST /corpus/load") return load_corpus(body);
    if (route == "POST /cohort/filter") return cohort_filter(body);
    if (route == "POST /projection") return run_projection(body);
    if (route == "POST /select/lasso") return lasso(body);
    if (route == "POST /features") return features(body);
    if (route == "POST /sampling") return sample(body);
  }
  return {404, error_body("NotFound", "no handler for " + route)};
}

const ehr::Corpus& Service::require_corpus() const {
  if (!state_.corpus) throw CorpusNotLoaded();
  return *state_.corpus;
}

std::uint64_t Service::bump_version() { return ++state_.version; }

Response Service::health() {
  json out = {{"status", state_.corpus ? "ready" : "empty"}, {"version", state_.version}};
  if (state_.corpus) out["patient_count"] = state_.corpus->patients.size();
  return {200, out};
}

Response Service::load_corpus(const json& body) {
  const bool has_path = body.contains("path");
  const bool has_inline = body.contains("corpus");
  if (has_path == has_inline) throw BadRequest("", "give exactly one of 'path' or 'corpus'");

  std::shared_ptr<ehr::Corpus> corpus;
  if (has_path) {
    const auto path = body.at("path").get<std::string>();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadRequest("/path", "cannot read corpus file " + path);
    corpus = std::make_shared<ehr::Corpus>(ehr::parse_corpus(in));
  } else {
    corpus = std::make_shared<ehr::Corpus>(ehr::parse_corpus_json(body.at("corpus")));
  }

  SessionState next;
  next.corpus = corpus;
  next.schema_config = projection::schema_config_for(*corpus);
  next.feature_schema = projection::feature_schema(next.schema_config);
  next.selection = cohort::select_all(*corpus, clock_->now());
  next.draft.rng_seed = config_.default_seed;
  next.version = state_.version;
  state_ = std::move(next);
  const auto version = bump_version();
  return {200,
          {{"version", version},
           {"summary", ehr::to_json(ehr::corpus_summary(*corpus))},
           {"feature_schema", {{"schema_version", projection::kFeatureSchemaVersion}, {"columns", state_.feature_schema}}}}};
}

Response Service::summary() { return {200, ehr::to_json(ehr::corpus_summary(require_corpus()))}; }

Response Service::cohort_filter(const json& body) {
  const auto& corpus = require_corpus();
  const auto filter = cohort::cohort_filter_from_json(body);
  state_.selection = cohort::apply_filter(corpus, filter, clock_->now());
  const auto version = bump_version();
  return {200, {{"version", version}, {"selection", cohort::to_json(state_.selection)}}};
}

Response Service::cohort_channels() {
  return {200, cohort::to_json(cohort::build_channels(require_corpus(), state_.selection))};
}

Response Service::run_projection(const json& body) {
  const auto& corpus = require_corpus();
  json cfg = body;
  if (!cfg.contains("seed")) cfg["seed"] = config_.default_seed;
  const auto config = projection::projection_config_from_json(cfg);
  const auto& ids = state_.selection.patient_ids;
  const auto matrix = projection::build_feature_matrix(corpus, ids, state_.schema_config);
  auto layout = projection::run_projection(matrix, config);
  json glyphs = json::array();
  for (const auto& id : ids) glyphs.push_back(projection::to_json(projection::build_glyph(corpus.patient(id))));
  json layout_json = projection::to_json(layout);
  state_.layout = std::move(layout);
  const auto version = bump_version();
  return {200, {{"version", version}, {"layout", std::move(layout_json)}, {"glyphs", std::move(glyphs)}}};
}

Response Service::timeline(const std::string& patient_id) {
  const auto& record = require_corpus().patient(patient_id);
  return {200, timeline::to_json(timeline::build_timeline(record))};
}

Response Service::expand(const std::string& patient_id, const std::string& lane_text, const std::string& index_text) {
  const auto& record = require_corpus().patient(patient_id);
  const auto lane = timeline::parse_lane(lane_text);
  if (!lane) throw BadRequest("lane", "unknown lane '" + lane_text + "'");
  std::size_t index = 0;
  try {
    std::size_t used = 0;
    index = std::stoul(index_text, &used);
    if (used != index_text.size()) throw std::invalid_argument(index_text);
  } catch (const std::exception&) {
    throw BadRequest("index", "event index must be a non-negative integer");
  }
  const auto doc = timeline::build_timeline(record);
  return {200, timeline::to_json(timeline::expand_event(record, doc, *lane, index))};
}

Response Service::lasso(const json& body) {
  const auto& corpus = require_corpus();
  if (!state_.layout) throw NoActiveLayout("run POST /projection before selecting");
  std::vector<Point> polygon;
  for (const auto& v : body.at("polygon")) polygon.emplace_back(v[0].get<double>(), v[1].get<double>());
  const auto selected = lasso_select(*state_.layout, polygon);
  const auto group = get_or<std::string>(body, "group", "auto");

  auto& draft = state_.draft;
  std::set<std::string> pos(draft.positives.begin(), draft.positives.end());
  std::set<std::string> neg(draft.negatives.begin(), draft.negatives.end());
  std::vector<std::string> skipped;
  for (const auto& id : selected) {
    bool positive = group == "positive";
    if (group == "auto") {
      const auto& r = corpus.patient(id);
      if (!sampling::extract_positives(corpus, {id}).empty()) {
        positive = true;
      } else if (r.outcome.has_sequela) {
        skipped.push_back(id);
        continue;
      }
    }
    (positive ? pos : neg).insert(id);
    (positive ? neg : pos).erase(id);
  }
  draft.positives.assign(pos.begin(), pos.end());
  draft.negatives.assign(neg.begin(), neg.end());
  draft.feature_names = state_.feature_list;
  draft.strategy = sampling::Strategy::manual;
  draft.strategy_params = json::object();
  const auto version = bump_version();
  return {200, {{"version", version}, {"selected", selected}, {"skipped", skipped}, {"draft", sampling::to_json(draft)}}};
}

Response Service::features(const json& body) {
  require_corpus();
  const auto action = body.at("action").get<std::string>();
  const auto name = body.at("feature").get<std::string>();
  auto& list = state_.feature_list;
  const auto it = std::find(list.begin(), list.end(), name);
  if (action == "add") {
    if (std::find(state_.feature_schema.begin(), state_.feature_schema.end(), name) == state_.feature_schema.end()) {
      throw UnknownFeature("unknown feature: " + name);
    }
    if (it == list.end()) list.push_back(name);
  } else {
    if (it == list.end()) throw UnknownFeature("feature not in list: " + name);
    list.erase(it);
  }
  state_.draft.feature_names = list;
  const auto version = bump_version();
  return {200, {{"version", version}, {"feature_list", list}}};
}

Response Service::sample(const json& body) {
  const auto& corpus = require_corpus();
  if (body.contains("filter")) {
    state_.selection = cohort::apply_filter(corpus, cohort::cohort_filter_from_json(body.at("filter")), clock_->now());
  }
  sampling::SamplingRequest req;
  req.strategy = *sampling::parse_strategy(get_or<std::string>(body, "strategy", "hard_negative"));
  if (body.contains("k")) req.k = body.at("k").get<int>();
  req.seed = get_or<std::uint64_t>(body, "seed", config_.default_seed);
  req.feature_names = state_.feature_list;
  req.covariates = get_or<std::vector<std::string>>(body, "covariates", {});

  const auto& ids = state_.selection.patient_ids;
  const auto positives = sampling::extract_positives(corpus, ids);
  auto result = sampling::sample_negatives(corpus, ids, positives, req);

  auto covariates = req.covariates;
  if (covariates.empty()) covariates = state_.feature_list.empty() ? state_.feature_schema : state_.feature_list;
  json balance = nullptr;
  if (!result.sample_set.positives.empty() && !result.sample_set.negatives.empty()) {
    try {
      balance = sampling::to_json(sampling::balance_report(corpus, ids, result.sample_set, covariates));
    } catch (const EmptyGroup&) {
      balance = nullptr;
    }
  }
  json details = sampling::to_json(result);
  details.erase("sample_set");
  state_.draft = result.sample_set;
  const auto version = bump_version();
  return {200, {{"version", version}, {"sample_set", sampling::to_json(state_.draft)}, {"balance", balance}, {"details", details}}};
}

Response Service::train(const json& body) {
  std::int64_t round_id = 0;
  std::uint64_t version = 0;
  {
    std::unique_lock lock(session_mutex_);
    const auto& corpus = require_corpus();
    (void)corpus;
    json forest = get_or<json>(body, "forest", json::object());
    if (!forest.contains("seed")) forest["seed"] = config_.default_seed;
    pipeline::TrainRequest req;
    req.forest_config = model::forest_config_from_json(forest);
    req.split_seed = get_or<std::uint64_t>(body, "split_seed", req.forest_config.rng_seed);
    req.split_fraction = get_or<double>(body, "split_fraction", 0.2);
    req.sample_set = state_.draft;
    if (req.sample_set.feature_names.empty()) req.sample_set.feature_names = state_.feature_schema;
    if (req.sample_set.positives.empty()) throw SingleClassError("sample draft has no positives");
    if (req.sample_set.negatives.empty()) throw SingleClassError("sample draft has no negatives");
    model::validate_config(req.forest_config, req.sample_set.feature_names.size());
    req.created_at = ehr::format_timestamp(clock_->now());

    std::lock_guard jobs(jobs_mutex_);
    round_id = next_round_id_++;
    queue_.push_back({round_id, state_.corpus, std::move(req)});
    job_status_[round_id] = {};
    version = bump_version();
  }
  jobs_cv_.notify_all();

  if (!get_or<bool>(body, "wait", false)) {
    return {202, {{"version", version}, {"round_id", round_id}, {"status", "queued"}}};
  }
  {
    std::unique_lock lock(jobs_mutex_);
    jobs_cv_.wait(lock, [&] {
      const auto s = job_status_.at(round_id).state;
      return s == JobState::complete || s == JobState::failed;
    });
  }
  auto r = round_status(std::to_string(round_id));
  r.body["version"] = version;
  return r;
}

void Service::worker_loop() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(jobs_mutex_);
      jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
      job_status_[job.round_id].state = JobState::running;
    }

    JobStatus status;
    std::shared_ptr<const pipeline::RoundArtifacts> artifacts;
    try {
      auto a = std::make_shared<pipeline::RoundArtifacts>(pipeline::train_round(*job.corpus, job.request));
      a->round.round_id = job.round_id;
      if (store_->record_round(a->round) != job.round_id) throw StorageError("round id out of sequence");
      artifacts = std::move(a);
      status.state = JobState::complete;
    } catch (const std::exception& e) {
      const auto* err = dynamic_cast<const Error*>(&e);
      status.state = JobState::failed;
      status.reason = (err ? err->code() : std::string("InternalError")) + ": " + e.what();
      logstore::ModelRound failed;
      failed.round_id = job.round_id;
      failed.created_at = job.request.created_at;
      failed.sample_set = job.request.sample_set;
      failed.forest_config = job.request.forest_config;
      failed.split_seed = job.request.split_seed;
      failed.split_fraction = job.request.split_fraction;
      failed.feature_schema_version = projection::kFeatureSchemaVersion;
      failed.status = logstore::RoundStatus::failed;
      failed.failure_reason = status.reason;
      try {
        store_->record_round(failed);
      } catch (const std::exception&) {
        // The status map still reports the failure.
      }
    }
    {
      std::lock_guard lock(jobs_mutex_);
      job_status_[job.round_id] = status;
      if (artifacts) artifacts_[job.round_id] = std::move(artifacts);
    }
    jobs_cv_.notify_all();
  }
}

void Service::wait_idle() {
  std::unique_lock lock(jobs_mutex_);
  jobs_cv_.wait(lock, [&] {
    if (!queue_.empty()) return false;
    return std::none_of(job_status_.begin(), job_status_.end(), [](const auto& kv) {
      return kv.second.state == JobState::queued || kv.second.state == JobState::running;
    });
  });
}

std::int64_t Service::parse_round_id(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto id = std::stoll(text, &used);
    if (used == text.size() && id >= 1) return id;
  } catch (const std::exception&) {
  }
  throw BadRequest("round", "round id must be a positive integer");
}

Response Service::round_status(const std::string& text) {
  const auto id = parse_round_id(text);
  {
    std::lock_guard lock(jobs_mutex_);
    auto it = job_status_.find(id);
    if (it != job_status_.end() && (it->second.state == JobState::queued || it->second.state == JobState::running)) {
      return {200, {{"round_id", id}, {"status", state_name(static_cast<int>(it->second.state))}}};
    }
  }
  const auto round = store_->get_round(id);
  json out = {{"round_id", id}, {"status", logstore::to_string(round.status)}};
  if (round.status == logstore::RoundStatus::failed) out["reason"] = round.failure_reason;
  if (round.eval) out["eval"] = model::to_json(*round.eval);
  return {200, out};
}

std::shared_ptr<const pipeline::RoundArtifacts> Service::artifacts_for(std::int64_t id) {
  {
    std::lock_guard lock(jobs_mutex_);
    if (auto it = artifacts_.find(id); it != artifacts_.end()) return it->second;
    auto st = job_status_.find(id);
    if (st != job_status_.end() && (st->second.state == JobState::queued || st->second.state == JobState::running)) {
      throw RoundUnavailable("RoundPending", "round " + std::to_string(id) + " is still training");
    }
  }
  const auto stored = store_->get_round(id);
  if (stored.status == logstore::RoundStatus::failed) {
    throw RoundUnavailable("RoundFailed", "round " + std::to_string(id) + " failed: " + stored.failure_reason);
  }
  std::shared_ptr<const ehr::Corpus> corpus;
  {
    std::shared_lock lock(session_mutex_);
    require_corpus();
    corpus = state_.corpus;
  }
  auto a = std::make_shared<pipeline::RoundArtifacts>(pipeline::replay_round(*corpus, stored));
  if (!pipeline::same_result(a->round, stored)) {
    throw RoundUnavailable("ReplayMismatch", "round " + std::to_string(id) + " does not reproduce on the loaded corpus");
  }
  a->round = stored;
  std::lock_guard lock(jobs_mutex_);
  artifacts_[id] = a;
  return a;
}

Response Service::round_shap(const std::string& text) {
  const auto id = parse_round_id(text);
  const auto a = artifacts_for(id);
  json out = model::to_json(a->shap, a->test_ids);
  out["round_id"] = id;
  return {200, out};
}

Response Service::round_view(const std::string& text) {
  const auto a = artifacts_for(parse_round_id(text));
  return {200, pipeline::modeling_view_data(*a)};
}

Response Service::logs() {
  json rounds = json::array();
  for (const auto& s : store_->list_rounds()) rounds.push_back(logstore::to_json(s));
  return {200, {{"rounds", std::move(rounds)}}};
}

Response Service::log_entry(const std::string& text) {
  return {200, logstore::to_json(store_->get_round(parse_round_id(text)))};
}

}  // namespace sequela::api
