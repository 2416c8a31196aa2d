#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"
#include "sequela/logstore/round.hpp"
#include "sequela/model/evaluate.hpp"
#include "sequela/model/forest.hpp"
#include "sequela/model/shap.hpp"
#include "sequela/projection/features.hpp"
#include "sequela/sampling/sampling.hpp"
#include "sequela/sampling/transform.hpp"

namespace sequela::pipeline {

struct TrainRequest {
  sampling::SampleSet sample_set;
  model::ForestConfig forest_config;
  std::uint64_t split_seed = 0;
  double split_fraction = 0.2;
  std::string created_at;
};

/// A finished round plus the in-memory products the Modeling View needs.
struct RoundArtifacts {
  logstore::ModelRound round;
  model::Forest forest;
  sampling::TransformSpec transform;
  /// Sample rows (positives and negatives, id order), requested features,
  /// median-imputed but not standardized.
  projection::FeatureMatrix raw;
  std::vector<int> labels;  // aligned with raw rows
  model::Split split;
  RowMatrix x_test;  // transformed, model_features columns
  std::vector<std::string> test_ids;
  std::vector<int> test_labels;
  model::ShapMatrix shap;  // test rows
};

/// Inputs that determine a round, hashed into the training fingerprint.
nlohmann::json fingerprint_inputs(const sampling::SampleSet& s, std::uint64_t split_seed, double split_fraction);

/// vectorize -> stratified split -> fit transform on train -> forest ->
/// evaluate on test -> SHAP on test with the train rows as background.
/// Throws SingleClassError when either group of the SampleSet is empty.
RoundArtifacts train_round(const ehr::Corpus& corpus, const TrainRequest& request);

/// Retrains from a stored snapshot with the stored seeds.
RoundArtifacts replay_round(const ehr::Corpus& corpus, const logstore::ModelRound& stored);

/// True when fingerprint, model digest, and EvalReport all match.
bool same_result(const logstore::ModelRound& a, const logstore::ModelRound& b);

struct BoxStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::size_t n = 0;
};

/// Five-number summary with type-7 quartiles. xs non-empty.
BoxStats box_stats(std::vector<double> xs);

/// Class tag and the colour the UI draws it with.
inline constexpr const char* kPositiveTag = "positive";
inline constexpr const char* kNegativeTag = "negative";
inline constexpr const char* kPositiveColor = "green";
inline constexpr const char* kNegativeColor = "yellow";

/// Parallel coordinates over the test rows, beeswarm points (n_test x p),
/// per-class box stats per requested feature, PCA scatter of all sample
/// rows with class tags, and the round's evaluation.
nlohmann::json modeling_view_data(const RoundArtifacts& artifacts);

}  // namespace sequela::pipeline
