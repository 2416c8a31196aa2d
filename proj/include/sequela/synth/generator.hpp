#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"

namespace sequela::synth {

/// Names accepted as RiskSpec coefficient keys. Every feature is non-negative:
/// cumulative prednisone-equivalent dose per class in units of 100 mg, age in
/// units of 50 years, and the latent confounder in [0, 2).
inline const std::vector<std::string> kRiskFeatures = {
    "short_acting_dose", "medium_acting_dose", "long_acting_dose", "age", "confounder"};

struct RiskSpec {
  std::uint64_t rng_seed = 0;
  int n_patients = 1000;
  double base_rate = 0.2;
  std::map<std::string, double> coefficients;
  int latency_days = 30;
  /// How strongly the confounder raises glucocorticoid use (and CRP).
  double confounder_strength = 1.0;
  /// When true the intercept is solved so the mean true probability equals
  /// base_rate. When false the intercept is logit(base_rate) and a raised
  /// positive coefficient can only add positives.
  bool calibrate_intercept = true;
};

/// Throws SpecError on invalid fields.
void validate_spec(const RiskSpec& spec);

RiskSpec risk_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RiskSpec& spec);

struct PatientTruth {
  std::string patient_id;
  double probability = 0.0;
  bool label = false;
  std::map<std::string, double> features;
};

struct GroundTruth {
  std::map<std::string, double> coefficients;
  double intercept = 0.0;
  std::vector<PatientTruth> patients;  // in patient-id order
  /// Distinct patients with a primary diagnosis in each 3-character prefix.
  std::map<std::string, int> primary_prefix_patients;
  /// Distinct patients with at least one order of each drug.
  std::map<std::string, int> drug_patients;
};

nlohmann::json to_json(const GroundTruth& gt);

struct Generated {
  ehr::Corpus corpus;
  GroundTruth truth;
};

/// Deterministic in spec.rng_seed. Each patient draws from its own stream
/// seeded by derive_seed(rng_seed, index), and all draws precede labeling,
/// so coefficient changes only move the Bernoulli thresholds.
Generated generate_corpus(const RiskSpec& spec);

/// Lab tests every generated admission may carry.
inline const std::vector<std::string> kCanonicalLabs = {"ALT", "CRP", "Calcium"};

/// Primary-diagnosis code prefixes the generator plants.
inline const std::vector<std::string> kPlantedPrefixes = {"J45", "M06", "M32"};

struct GroundTruthReport {
  std::optional<double> true_auc;  // nullopt when a class is missing
  std::map<std::string, int> effect_signs;
  std::size_t n_patients = 0;
  std::size_t n_positive = 0;
};

GroundTruthReport ground_truth_report(const GroundTruth& gt);

nlohmann::json to_json(const GroundTruthReport& report);

}  // namespace sequela::synth
