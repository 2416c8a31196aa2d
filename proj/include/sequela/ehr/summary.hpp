#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"

namespace sequela::ehr {

struct GroupCounts {
  std::size_t diagnoses = 0;
  std::size_t lab_tests = 0;
  std::size_t examinations = 0;
  std::size_t medication_orders = 0;
  std::size_t medical_notes = 0;

  bool operator==(const GroupCounts&) const = default;
};

struct CorpusSummary {
  std::size_t patient_count = 0;
  std::size_t positive_count = 0;
  double prevalence = 0.0;
  std::size_t admission_count = 0;
  GroupCounts group_counts;
  /// Earliest admit to latest discharge; empty for an empty corpus.
  std::optional<Timestamp> time_span_begin;
  std::optional<Timestamp> time_span_end;
  /// Indexed by HormoneClass (short, medium, long, non_hormone).
  std::array<std::size_t, 4> orders_by_class{};

  bool operator==(const CorpusSummary&) const = default;
};

CorpusSummary corpus_summary(const Corpus& corpus);

nlohmann::json to_json(const CorpusSummary& summary);

}  // namespace sequela::ehr
