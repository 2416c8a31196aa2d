#include "sequela/ehr/record.hpp"

#include <algorithm>

#include "sequela/error.hpp"

namespace sequela::ehr {

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::other: return "other";
  }
  return "other";
}

std::string_view to_string(HormoneClass c) {
  switch (c) {
    case HormoneClass::short_acting: return "short_acting";
    case HormoneClass::medium_acting: return "medium_acting";
    case HormoneClass::long_acting: return "long_acting";
    case HormoneClass::non_hormone: return "non_hormone";
  }
  return "non_hormone";
}

std::string_view to_string(ResultFlag f) {
  switch (f) {
    case ResultFlag::normal: return "normal";
    case ResultFlag::abnormal: return "abnormal";
    case ResultFlag::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  if (s == "other") return Gender::other;
  return std::nullopt;
}

std::optional<HormoneClass> parse_hormone_class(std::string_view s) {
  if (s == "short_acting") return HormoneClass::short_acting;
  if (s == "medium_acting") return HormoneClass::medium_acting;
  if (s == "long_acting") return HormoneClass::long_acting;
  if (s == "non_hormone") return HormoneClass::non_hormone;
  return std::nullopt;
}

std::optional<ResultFlag> parse_result_flag(std::string_view s) {
  if (s == "normal") return ResultFlag::normal;
  if (s == "abnormal") return ResultFlag::abnormal;
  if (s == "unknown") return ResultFlag::unknown;
  return std::nullopt;
}

const PatientRecord& Corpus::patient(std::string_view id) const {
  auto it = patients.find(id);
  if (it == patients.end()) throw NotFound("unknown patient id: " + std::string(id));
  return it->second;
}

Corpus sub_corpus(const Corpus& corpus, const std::vector<std::string>& ids) {
  Corpus out;
  out.schema_version = corpus.schema_version;
  out.drug_dictionary = corpus.drug_dictionary;
  for (const auto& id : ids) {
    if (auto it = corpus.patients.find(id); it != corpus.patients.end()) {
      out.patients.emplace(it->first, it->second);
    }
  }
  return out;
}

double total_stay_days(const PatientRecord& record) {
  Timestamp total = 0;
  for (const auto& a : record.admissions) total += a.length_seconds();
  return to_days(total);
}

double cumulative_dose(const PatientRecord& record, HormoneClass c) {
  double total = 0.0;
  for (const auto& a : record.admissions) {
    for (const auto& o : a.medication_orders) {
      if (o.hormone_class == c) total += o.dose;
    }
  }
  return total;
}

int order_count(const PatientRecord& record, HormoneClass c) {
  int n = 0;
  for (const auto& a : record.admissions) {
    n += static_cast<int>(std::count_if(a.medication_orders.begin(), a.medication_orders.end(),
                                        [c](const MedicationOrder& o) { return o.hormone_class == c; }));
  }
  return n;
}

bool uses_class(const PatientRecord& record, HormoneClass c) { return order_count(record, c) > 0; }

std::optional<Timestamp> first_hormone_exposure(const PatientRecord& record) {
  std::optional<Timestamp> first;
  for (const auto& a : record.admissions) {
    for (const auto& o : a.medication_orders) {
      if (is_hormone(o.hormone_class) && (!first || o.order_time < *first)) first = o.order_time;
    }
  }
  return first;
}

}  // namespace sequela::ehr
