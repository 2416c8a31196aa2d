#include "sequela/logstore/round.hpp"

#include "sequela/error.hpp"
#include "sequela/util/json.hpp"

namespace sequela::logstore {

using nlohmann::json;

std::string_view to_string(RoundStatus s) { return s == RoundStatus::complete ? "complete" : "failed"; }

RoundSummary summarize(const ModelRound& r) {
  RoundSummary s;
  s.round_id = r.round_id;
  s.created_at = r.created_at;
  s.n_positives = r.sample_set.positives.size();
  s.n_negatives = r.sample_set.negatives.size();
  s.strategy = std::string(sampling::to_string(r.sample_set.strategy));
  if (r.eval) s.auc = r.eval->auc;
  s.status = r.status;
  s.failure_reason = r.failure_reason;
  return s;
}

json to_json(const ModelRound& r) {
  json shap = json::array();
  for (const auto& f : r.shap_summary) shap.push_back({{"feature", f.feature}, {"mean_abs_shap", f.mean_abs_shap}});
  json status = {{"state", to_string(r.status)}};
  if (r.status == RoundStatus::failed) status["reason"] = r.failure_reason;
  return {{"round_id", r.round_id},
          {"created_at", r.created_at},
          {"sample_set", sampling::to_json(r.sample_set)},
          {"forest_config", model::to_json(r.forest_config)},
          {"split_seed", r.split_seed},
          {"split_fraction", r.split_fraction},
          {"feature_schema_version", r.feature_schema_version},
          {"training_fingerprint", r.training_fingerprint},
          {"model_digest", r.model_digest},
          {"model_features", r.model_features},
          {"eval", r.eval ? model::to_json(*r.eval) : json(nullptr)},
          {"shap_summary", std::move(shap)},
          {"status", std::move(status)}};
}

ModelRound model_round_from_json(const json& j) {
  try {
    ModelRound r;
    r.round_id = j.at("round_id").get<std::int64_t>();
    r.created_at = j.at("created_at").get<std::string>();
    r.sample_set = sampling::sample_set_from_json(j.at("sample_set"));
    r.forest_config = model::forest_config_from_json(j.at("forest_config"));
    r.split_seed = j.at("split_seed").get<std::uint64_t>();
    r.split_fraction = j.at("split_fraction").get<double>();
    r.feature_schema_version = j.at("feature_schema_version").get<std::string>();
    r.training_fingerprint = j.at("training_fingerprint").get<std::string>();
    r.model_digest = j.at("model_digest").get<std::string>();
    r.model_features = j.at("model_features").get<std::vector<std::string>>();
    if (!j.at("eval").is_null()) r.eval = model::eval_report_from_json(j.at("eval"));
    for (const auto& f : j.at("shap_summary")) {
      r.shap_summary.push_back({f.at("feature").get<std::string>(), f.at("mean_abs_shap").get<double>()});
    }
    const auto& status = j.at("status");
    r.status = status.at("state").get<std::string>() == "failed" ? RoundStatus::failed : RoundStatus::complete;
    if (r.status == RoundStatus::failed) r.failure_reason = status.at("reason").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw StorageError(std::string("malformed round document: ") + e.what());
  }
}

json to_json(const RoundSummary& s) {
  json out = {{"round_id", s.round_id},
              {"created_at", s.created_at},
              {"n_positives", s.n_positives},
              {"n_negatives", s.n_negatives},
              {"strategy", s.strategy},
              {"auc", optional_json(s.auc)},
              {"status", to_string(s.status)}};
  if (s.status == RoundStatus::failed) out["reason"] = s.failure_reason;
  return out;
}

}  // namespace sequela::logstore
