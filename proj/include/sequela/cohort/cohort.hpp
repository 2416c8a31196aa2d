#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"

namespace sequela::cohort {

/// Conjunction of optional predicates. An absent predicate matches everyone;
/// a present but empty set matches no one.
struct CohortFilter {
  std::optional<std::pair<int, int>> age_range;  // inclusive
  std::optional<std::set<ehr::Gender>> genders;
  /// Patient has at least one order in any listed class.
  std::optional<std::set<ehr::HormoneClass>> hormone_classes;
  /// Patient has a primary diagnosis (any admission) in any listed cluster.
  std::optional<std::set<std::string>> primary_disease_clusters;
  std::optional<bool> outcome;

  bool operator==(const CohortFilter&) const = default;
};

struct CohortSelection {
  CohortFilter filter;
  std::vector<std::string> patient_ids;  // sorted
  ehr::Timestamp created_at = 0;

  bool operator==(const CohortSelection&) const = default;
};

/// Disease cluster id of a diagnosis code: its first three characters
/// (the ICD category), or the whole code when shorter.
std::string cluster_of(const std::string& code);

bool matches(const ehr::PatientRecord& record, const CohortFilter& filter);

/// Throws FilterError when age_range is inverted.
CohortSelection apply_filter(const ehr::Corpus& corpus, const CohortFilter& filter,
                             ehr::Timestamp created_at = 0);

/// Selection of every patient in the corpus.
CohortSelection select_all(const ehr::Corpus& corpus, ehr::Timestamp created_at = 0);

// ---- channels -------------------------------------------------------------

/// One parallel-coordinates polyline.
struct DemographicPoint {
  std::string patient_id;
  int age = 0;
  ehr::Gender gender = ehr::Gender::other;
  double stay_days = 0.0;
  double cumulative_dose = 0.0;  // prednisone-equivalent mg, all three classes

  bool operator==(const DemographicPoint&) const = default;
};

struct DemographicGroup {
  std::vector<DemographicPoint> points;
  /// Medians of age, stay_days, cumulative_dose; absent when the group is empty.
  std::optional<double> median_age;
  std::optional<double> median_stay_days;
  std::optional<double> median_cumulative_dose;

  bool operator==(const DemographicGroup&) const = default;
};

struct DemographicsChannel {
  DemographicGroup with_sequela;
  DemographicGroup without_sequela;

  bool operator==(const DemographicsChannel&) const = default;
};

struct DiseaseCluster {
  std::string cluster_id;
  std::string label;  // most frequent diagnosis text
  int patient_count = 0;
  std::vector<std::string> top_terms;  // up to five

  bool operator==(const DiseaseCluster&) const = default;
};

struct DrugBar {
  std::string drug_name;
  int patient_count = 0;

  bool operator==(const DrugBar&) const = default;
};

struct DrugClassColumn {
  ehr::HormoneClass hormone_class = ehr::HormoneClass::short_acting;
  int patient_count = 0;
  std::vector<DrugBar> drugs;  // by name

  bool operator==(const DrugClassColumn&) const = default;
};

struct SankeyLink {
  std::string source;  // "demo:<gender>:<age band>" or "cluster:<id>"
  std::string target;  // "cluster:<id>" or "class:<hormone class>"
  int patient_count = 0;

  bool operator==(const SankeyLink&) const = default;
};

struct ChannelSummary {
  DemographicsChannel demographics;
  std::vector<DiseaseCluster> disease_clusters;
  std::vector<DrugClassColumn> drug_channel;
  std::vector<SankeyLink> sankey_links;

  bool operator==(const ChannelSummary&) const = default;
};

DemographicsChannel build_demographics_channel(const ehr::Corpus& corpus, const CohortSelection& selection);
std::vector<DiseaseCluster> build_disease_channel(const ehr::Corpus& corpus, const CohortSelection& selection);
std::vector<DrugClassColumn> build_drug_channel(const ehr::Corpus& corpus, const CohortSelection& selection);
std::vector<SankeyLink> build_sankey_links(const ehr::Corpus& corpus, const CohortSelection& selection);
ChannelSummary build_channels(const ehr::Corpus& corpus, const CohortSelection& selection);

/// Demographic bin used for Sankey sources: gender and age band
/// (0-17, 18-39, 40-59, 60-79, 80+).
std::string demographic_bin(const ehr::PatientRecord& record);

nlohmann::json to_json(const CohortFilter& filter);
/// Throws FilterError on unknown enum values or malformed fields.
CohortFilter cohort_filter_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CohortSelection& selection);
nlohmann::json to_json(const ChannelSummary& channels);

}  // namespace sequela::cohort
