#include "sequela/ehr/summary.hpp"

#include <algorithm>

#include "sequela/util/json.hpp"

namespace sequela::ehr {

namespace {

std::optional<std::string> fmt_time(const std::optional<Timestamp>& t) {
  if (!t) return std::nullopt;
  return format_timestamp(*t);
}

}  // namespace

CorpusSummary corpus_summary(const Corpus& corpus) {
  CorpusSummary s;
  s.patient_count = corpus.patients.size();
  for (const auto& [id, p] : corpus.patients) {
    if (p.outcome.has_sequela) ++s.positive_count;
    for (const auto& a : p.admissions) {
      ++s.admission_count;
      s.group_counts.diagnoses += a.diagnoses.size();
      s.group_counts.lab_tests += a.lab_tests.size();
      s.group_counts.examinations += a.examinations.size();
      s.group_counts.medication_orders += a.medication_orders.size();
      s.group_counts.medical_notes += a.medical_notes.size();
      for (const auto& o : a.medication_orders) ++s.orders_by_class[static_cast<std::size_t>(o.hormone_class)];
      s.time_span_begin = s.time_span_begin ? std::min(*s.time_span_begin, a.admit_time) : a.admit_time;
      s.time_span_end = s.time_span_end ? std::max(*s.time_span_end, a.discharge_time) : a.discharge_time;
    }
  }
  if (s.patient_count > 0) {
    s.prevalence = static_cast<double>(s.positive_count) / static_cast<double>(s.patient_count);
  }
  return s;
}

nlohmann::json to_json(const CorpusSummary& s) {
  nlohmann::json by_class = nlohmann::json::object();
  for (std::size_t c = 0; c < s.orders_by_class.size(); ++c) {
    by_class[std::string(to_string(static_cast<HormoneClass>(c)))] = s.orders_by_class[c];
  }
  return {{"patient_count", s.patient_count},
          {"positive_count", s.positive_count},
          {"prevalence", s.prevalence},
          {"admission_count", s.admission_count},
          {"group_counts",
           {{"diagnoses", s.group_counts.diagnoses},
            {"lab_tests", s.group_counts.lab_tests},
            {"examinations", s.group_counts.examinations},
            {"medication_orders", s.group_counts.medication_orders},
            {"medical_notes", s.group_counts.medical_notes}}},
          {"time_span",
           {{"begin", optional_json(fmt_time(s.time_span_begin))},
            {"end", optional_json(fmt_time(s.time_span_end))}}},
          {"orders_by_class", std::move(by_class)}};
}

}  // namespace sequela::ehr
