#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"
#include "sequela/model/forest.hpp"

namespace sequela::sampling {

/// manual marks drafts assembled by hand (lasso selections).
enum class Strategy { random, hard_negative, psm, manual };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view s);

struct SampleSet {
  std::vector<std::string> positives;  // sorted
  std::vector<std::string> negatives;  // sorted, disjoint from positives
  std::vector<std::string> feature_names;
  Strategy strategy = Strategy::manual;
  nlohmann::json strategy_params = nlohmann::json::object();
  std::uint64_t rng_seed = 0;

  bool operator==(const SampleSet&) const = default;
};

nlohmann::json to_json(const SampleSet& s);
SampleSet sample_set_from_json(const nlohmann::json& j);

/// Selected patients labeled positive whose first glucocorticoid order
/// strictly precedes the onset time. Sorted.
std::vector<std::string> extract_positives(const ehr::Corpus& corpus, const std::vector<std::string>& selection);

/// Selected patients labeled negative. Sorted.
std::vector<std::string> negative_pool(const ehr::Corpus& corpus, const std::vector<std::string>& selection);

struct SamplingRequest {
  Strategy strategy = Strategy::hard_negative;
  std::optional<int> k;  // defaults to the positive count
  std::uint64_t seed = 0;
  /// Seed-model features for hard_negative; copied into the SampleSet.
  /// Empty means the full vectorization schema.
  std::vector<std::string> feature_names;
  /// Propensity covariates for psm. Empty means feature_names.
  std::vector<std::string> covariates;
};

/// Small fixed forest used to score negatives in the hard-negative strategy.
model::ForestConfig seed_model_config(std::uint64_t seed);

struct MatchedPair {
  std::string positive;
  std::string negative;
  double logit_distance = 0.0;
};

struct SamplingResult {
  SampleSet sample_set;
  // hard_negative
  std::vector<std::string> seed_negatives;          // stage-1 draw
  std::map<std::string, double> candidate_scores;   // stage-2 score per remaining negative
  // psm
  std::vector<MatchedPair> pairs;
  std::vector<std::string> unmatched_positives;
  double caliper = 0.0;
  std::map<std::string, double> logits;
};

/// Builds a SampleSet from the selection. Throws InsufficientNegatives,
/// EmptyGroup (no positives for hard_negative/psm), ConvergenceError,
/// UnknownFeature, SpecError.
SamplingResult sample_negatives(const ehr::Corpus& corpus, const std::vector<std::string>& selection,
                                const std::vector<std::string>& positives, const SamplingRequest& request);

struct CovariateBalance {
  std::string name;
  std::optional<double> smd_before;  // nullopt: pooled sd 0 with unequal means
  std::optional<double> smd_after;
};

struct BalanceReport {
  std::vector<CovariateBalance> covariates;
  double mean_abs_smd_before = 0.0;  // over defined values
  double mean_abs_smd_after = 0.0;
};

/// (mean_a - mean_b) / sqrt((var_a + var_b) / 2) with sample variances.
std::optional<double> standardized_mean_difference(const std::vector<double>& a, const std::vector<double>& b);

/// "Before" compares every extracted positive in the selection with the
/// whole negative pool; "after" compares the SampleSet's two groups.
/// Throws EmptyGroup when a group is empty.
BalanceReport balance_report(const ehr::Corpus& corpus, const std::vector<std::string>& selection,
                             const SampleSet& sample_set, const std::vector<std::string>& covariates);

nlohmann::json to_json(const BalanceReport& r);
nlohmann::json to_json(const SamplingResult& r);

}  // namespace sequela::sampling
