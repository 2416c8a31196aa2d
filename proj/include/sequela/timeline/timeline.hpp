#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"

namespace sequela::timeline {

/// Lane order is fixed. "Checks Information" carries examinations.
enum class Lane { medication_orders = 0, laboratory_tests = 1, checks_information = 2 };

inline constexpr std::array<Lane, 3> kLanes = {Lane::medication_orders, Lane::laboratory_tests,
                                               Lane::checks_information};

std::string_view lane_title(Lane lane);  // "Medication Order", ...
std::string_view lane_key(Lane lane);    // "medication_orders", ...
std::optional<Lane> parse_lane(std::string_view key);

/// Where the layer-3 record lives in the source PatientRecord.
struct SourceRef {
  std::size_t admission_index = 0;
  std::size_t event_index = 0;

  bool operator==(const SourceRef&) const = default;
};

struct LaneEvent {
  ehr::Timestamp time = 0;
  /// Layer 1 is the presence marker at `time`. Layer 2 is name + key value.
  std::string name;
  std::optional<double> value;
  std::string value_label;  // unit, or the result flag for examinations
  SourceRef source;

  bool operator==(const LaneEvent&) const = default;
};

struct LaneData {
  Lane lane = Lane::medication_orders;
  std::vector<LaneEvent> events;  // time order

  bool operator==(const LaneData&) const = default;
};

struct TimelineDoc {
  std::string patient_id;
  ehr::Timestamp t0 = 0;  // first admit
  ehr::Timestamp t1 = 0;  // last discharge
  std::array<LaneData, 3> lanes;
  /// Admission windows on the shared axis; gaps between them are kept.
  std::vector<std::pair<ehr::Timestamp, ehr::Timestamp>> admissions;

  const LaneData& lane(Lane l) const { return lanes[static_cast<std::size_t>(l)]; }

  bool operator==(const TimelineDoc&) const = default;
};

TimelineDoc build_timeline(const ehr::PatientRecord& record);

/// Layer-3 detail: the verbatim source event plus medical notes written in the
/// same admission on the same calendar day (UTC).
struct EventDetail {
  Lane lane = Lane::medication_orders;
  std::variant<ehr::MedicationOrder, ehr::LabTest, ehr::Examination> event;
  std::vector<ehr::MedicalNote> notes;
};

/// Throws IndexError when event_index is out of range for the lane.
EventDetail expand_event(const ehr::PatientRecord& record, const TimelineDoc& doc, Lane lane,
                         std::size_t event_index);

nlohmann::json to_json(const TimelineDoc& doc);
nlohmann::json to_json(const EventDetail& detail);

}  // namespace sequela::timeline
