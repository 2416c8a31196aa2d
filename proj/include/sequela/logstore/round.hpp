#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/model/evaluate.hpp"
#include "sequela/model/forest.hpp"
#include "sequela/sampling/sampling.hpp"

namespace sequela::logstore {

enum class RoundStatus { complete, failed };

std::string_view to_string(RoundStatus s);

struct FeatureImportance {
  std::string feature;
  double mean_abs_shap = 0.0;

  bool operator==(const FeatureImportance&) const = default;
};

/// Everything needed to retrain and re-evaluate one modeling round.
struct ModelRound {
  std::int64_t round_id = 0;
  std::string created_at;
  sampling::SampleSet sample_set;
  model::ForestConfig forest_config;
  std::uint64_t split_seed = 0;
  double split_fraction = 0.2;
  std::string feature_schema_version;
  std::string training_fingerprint;
  std::string model_digest;
  /// Columns the forest was trained on (constant columns removed).
  std::vector<std::string> model_features;
  std::optional<model::EvalReport> eval;  // absent for failed rounds
  std::vector<FeatureImportance> shap_summary;  // model_features order
  RoundStatus status = RoundStatus::complete;
  std::string failure_reason;

  bool operator==(const ModelRound&) const = default;
};

struct RoundSummary {
  std::int64_t round_id = 0;
  std::string created_at;
  std::size_t n_positives = 0;
  std::size_t n_negatives = 0;
  std::string strategy;
  std::optional<double> auc;
  RoundStatus status = RoundStatus::complete;
  std::string failure_reason;
};

RoundSummary summarize(const ModelRound& round);

nlohmann::json to_json(const ModelRound& round);
ModelRound model_round_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RoundSummary& summary);

}  // namespace sequela::logstore
