#include "sequela/ehr/validate.hpp"

#include <cmath>
#include <regex>

namespace sequela::ehr {

namespace {

const std::vector<std::regex>& deny_patterns() {
  static const std::vector<std::regex> patterns = {
      std::regex(R"(\d{17}[\dXx])"),             // 18-character national id number
      std::regex(R"(\d{3}-\d{2}-\d{4})"),        // SSN
      std::regex(R"(\d{11})"),                   // mobile phone number
      std::regex(R"([^@\s]+@[^@\s]+\.[A-Za-z]+)"),  // e-mail
      std::regex(R"([A-Z][a-z]+[ _][A-Z][a-z]+)"),  // "Given Family" personal name
  };
  return patterns;
}

std::string at(const std::string& prefix, std::size_t i) {
  return prefix + "[" + std::to_string(i) + "]";
}

}  // namespace

bool looks_like_direct_identifier(const std::string& id) {
  for (const auto& re : deny_patterns()) {
    if (std::regex_search(id, re)) return true;
  }
  return false;
}

std::vector<Violation> validate_record(const PatientRecord& record, const DrugDictionary& dict) {
  std::vector<Violation> out;
  auto flag = [&out](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };

  if (record.patient_id.empty()) {
    flag("patient_id", "patient_id non-empty");
  } else if (looks_like_direct_identifier(record.patient_id)) {
    flag("patient_id", "patient_id contains no direct identifiers");
  }
  if (record.age < 0) flag("age", "age >= 0");
  if (record.admissions.empty()) flag("admissions", "at least one admission");

  for (std::size_t i = 0; i < record.admissions.size(); ++i) {
    const auto& adm = record.admissions[i];
    const std::string base = at("admissions", i);
    if (adm.admit_time >= adm.discharge_time) flag(base, "admit_time < discharge_time");
    if (i > 0) {
      const auto& prev = record.admissions[i - 1];
      if (adm.admit_time < prev.admit_time) {
        flag(base + ".admit_time", "admissions sorted by admit_time");
      } else if (adm.admit_time < prev.discharge_time) {
        flag(base + ".admit_time", "admission intervals non-overlapping");
      }
    }
    auto in_window = [&adm](Timestamp t) { return t >= adm.admit_time && t <= adm.discharge_time; };

    int primaries = 0;
    for (const auto& d : adm.diagnoses) primaries += d.is_primary ? 1 : 0;
    if (primaries > 1) flag(base + ".diagnoses", "at most one primary diagnosis");

    for (std::size_t j = 0; j < adm.lab_tests.size(); ++j) {
      const auto& lab = adm.lab_tests[j];
      const std::string f = at(base + ".lab_tests", j);
      if (!in_window(lab.sample_time)) flag(f + ".sample_time", "event time within admission window");
      if (!std::isfinite(lab.value)) flag(f + ".value", "value finite");
      if (lab.reference_low && lab.reference_high && *lab.reference_low > *lab.reference_high) {
        flag(f, "reference_low <= reference_high");
      }
    }
    for (std::size_t j = 0; j < adm.examinations.size(); ++j) {
      if (!in_window(adm.examinations[j].exam_time)) {
        flag(at(base + ".examinations", j) + ".exam_time", "event time within admission window");
      }
    }
    for (std::size_t j = 0; j < adm.medication_orders.size(); ++j) {
      const auto& order = adm.medication_orders[j];
      const std::string f = at(base + ".medication_orders", j);
      if (!in_window(order.order_time)) flag(f + ".order_time", "event time within admission window");
      if (!(order.dose_mg >= 0.0) || !std::isfinite(order.dose_mg)) flag(f + ".dose", "dose >= 0");
      auto it = dict.find(order.drug_name);
      if (it == dict.end()) {
        flag(f + ".drug_name", "drug not in dictionary");
      } else if (it->second.hormone_class != order.hormone_class) {
        flag(f + ".hormone_class", "hormone_class matches dictionary");
      }
    }
    for (std::size_t j = 0; j < adm.medical_notes.size(); ++j) {
      if (!in_window(adm.medical_notes[j].note_time)) {
        flag(at(base + ".medical_notes", j) + ".note_time", "event time within admission window");
      }
    }
  }

  const auto& outcome = record.outcome;
  if (outcome.has_sequela != outcome.onset_time.has_value()) {
    flag("outcome.onset_time", "onset_time present iff has_sequela");
  }
  if (outcome.onset_time && !record.admissions.empty() &&
      *outcome.onset_time < record.admissions.front().admit_time) {
    flag("outcome.onset_time", "onset_time >= first admit_time");
  }
  return out;
}

}  // namespace sequela::ehr
