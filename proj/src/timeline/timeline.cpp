#include "sequela/timeline/timeline.hpp"

#include <algorithm>

#include "sequela/ehr/corpus_json.hpp"
#include "sequela/error.hpp"
#include "sequela/util/json.hpp"

namespace sequela::timeline {

using nlohmann::json;

std::string_view lane_title(Lane lane) {
  switch (lane) {
    case Lane::medication_orders: return "Medication Order";
    case Lane::laboratory_tests: return "Laboratory Tests";
    case Lane::checks_information: return "Checks Information";
  }
  return "";
}

std::string_view lane_key(Lane lane) {
  switch (lane) {
    case Lane::medication_orders: return "medication_orders";
    case Lane::laboratory_tests: return "laboratory_tests";
    case Lane::checks_information: return "checks_information";
  }
  return "";
}

std::optional<Lane> parse_lane(std::string_view key) {
  for (auto l : kLanes) {
    if (lane_key(l) == key) return l;
  }
  return std::nullopt;
}

TimelineDoc build_timeline(const ehr::PatientRecord& record) {
  TimelineDoc doc;
  doc.patient_id = record.patient_id;
  for (auto l : kLanes) doc.lanes[static_cast<std::size_t>(l)].lane = l;
  if (!record.admissions.empty()) {
    doc.t0 = record.admissions.front().admit_time;
    doc.t1 = record.admissions.back().discharge_time;
  }

  auto& orders = doc.lanes[0].events;
  auto& labs = doc.lanes[1].events;
  auto& checks = doc.lanes[2].events;
  for (std::size_t a = 0; a < record.admissions.size(); ++a) {
    const auto& adm = record.admissions[a];
    doc.admissions.emplace_back(adm.admit_time, adm.discharge_time);
    for (std::size_t i = 0; i < adm.medication_orders.size(); ++i) {
      const auto& o = adm.medication_orders[i];
      orders.push_back({o.order_time, o.drug_name, o.dose_mg, "mg", {a, i}});
    }
    for (std::size_t i = 0; i < adm.lab_tests.size(); ++i) {
      const auto& l = adm.lab_tests[i];
      labs.push_back({l.sample_time, l.test_name, l.value, l.unit, {a, i}});
    }
    for (std::size_t i = 0; i < adm.examinations.size(); ++i) {
      const auto& e = adm.examinations[i];
      checks.push_back({e.exam_time, e.exam_name, std::nullopt, std::string(ehr::to_string(e.result_flag)), {a, i}});
    }
  }
  for (auto& lane : doc.lanes) {
    std::stable_sort(lane.events.begin(), lane.events.end(),
                     [](const LaneEvent& x, const LaneEvent& y) { return x.time < y.time; });
  }
  return doc;
}

EventDetail expand_event(const ehr::PatientRecord& record, const TimelineDoc& doc, Lane lane,
                         std::size_t event_index) {
  const auto& events = doc.lane(lane).events;
  if (event_index >= events.size()) {
    throw IndexError("event " + std::to_string(event_index) + " out of range for lane " +
                     std::string(lane_key(lane)) + " (" + std::to_string(events.size()) + " events)");
  }
  const auto& ref = events[event_index].source;
  if (record.patient_id != doc.patient_id || ref.admission_index >= record.admissions.size()) {
    throw IndexError("timeline does not belong to patient " + record.patient_id);
  }
  const auto& adm = record.admissions[ref.admission_index];

  EventDetail detail;
  detail.lane = lane;
  ehr::Timestamp t = 0;
  switch (lane) {
    case Lane::medication_orders:
      detail.event = adm.medication_orders.at(ref.event_index);
      t = adm.medication_orders[ref.event_index].order_time;
      break;
    case Lane::laboratory_tests:
      detail.event = adm.lab_tests.at(ref.event_index);
      t = adm.lab_tests[ref.event_index].sample_time;
      break;
    case Lane::checks_information:
      detail.event = adm.examinations.at(ref.event_index);
      t = adm.examinations[ref.event_index].exam_time;
      break;
  }
  const auto day = t / ehr::kSecondsPerDay;
  for (const auto& note : adm.medical_notes) {
    if (note.note_time / ehr::kSecondsPerDay == day) detail.notes.push_back(note);
  }
  return detail;
}

json to_json(const TimelineDoc& doc) {
  json lanes = json::array();
  for (const auto& lane : doc.lanes) {
    json events = json::array();
    for (const auto& e : lane.events) {
      events.push_back({{"time", ehr::format_timestamp(e.time)},
                        {"layer1", {{"marker", true}}},
                        {"layer2", {{"name", e.name}, {"value", optional_json(e.value)}, {"label", e.value_label}}},
                        {"layer3_ref", {{"admission", e.source.admission_index}, {"index", e.source.event_index}}}});
    }
    lanes.push_back({{"key", lane_key(lane.lane)}, {"title", lane_title(lane.lane)}, {"events", std::move(events)}});
  }
  json admissions = json::array();
  for (const auto& [a, d] : doc.admissions) {
    admissions.push_back({{"admit", ehr::format_timestamp(a)}, {"discharge", ehr::format_timestamp(d)}});
  }
  return {{"patient_id", doc.patient_id},
          {"time_domain", {ehr::format_timestamp(doc.t0), ehr::format_timestamp(doc.t1)}},
          {"admissions", std::move(admissions)},
          {"lanes", std::move(lanes)}};
}

json to_json(const EventDetail& detail) {
  json event = std::visit([](const auto& e) { return ehr::to_json(e); }, detail.event);
  json notes = json::array();
  for (const auto& n : detail.notes) notes.push_back(ehr::to_json(n));
  return {{"lane", lane_key(detail.lane)}, {"event", std::move(event)}, {"notes", std::move(notes)}};
}

}  // namespace sequela::timeline
