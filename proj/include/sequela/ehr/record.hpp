#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sequela/ehr/time.hpp"

namespace sequela::ehr {

enum class Gender { female, male, other };

enum class HormoneClass { short_acting, medium_acting, long_acting, non_hormone };

/// The three glucocorticoid classes in display order. non_hormone is excluded.
inline constexpr std::array<HormoneClass, 3> kHormoneClasses = {
    HormoneClass::short_acting, HormoneClass::medium_acting, HormoneClass::long_acting};

enum class ResultFlag { normal, abnormal, unknown };

std::string_view to_string(Gender g);
std::string_view to_string(HormoneClass c);
std::string_view to_string(ResultFlag f);

std::optional<Gender> parse_gender(std::string_view s);
std::optional<HormoneClass> parse_hormone_class(std::string_view s);
std::optional<ResultFlag> parse_result_flag(std::string_view s);

inline bool is_hormone(HormoneClass c) { return c != HormoneClass::non_hormone; }

struct Diagnosis {
  std::string code;
  std::string text;
  bool is_primary = false;

  bool operator==(const Diagnosis&) const = default;
};

struct LabTest {
  std::string test_name;
  double value = 0.0;
  std::string unit;
  std::optional<double> reference_low;
  std::optional<double> reference_high;
  Timestamp sample_time = 0;

  /// True when a reference bound exists and the value lies outside it.
  bool is_abnormal() const {
    return (reference_low && value < *reference_low) || (reference_high && value > *reference_high);
  }

  bool operator==(const LabTest&) const = default;
};

// "Checks Information" in the event view
struct Examination {
  std::string exam_name;
  ResultFlag result_flag = ResultFlag::unknown;
  std::string report_text;
  Timestamp exam_time = 0;

  bool operator==(const Examination&) const = default;
};

struct MedicationOrder {
  std::string drug_name;
  HormoneClass hormone_class = HormoneClass::non_hormone;
  /// Dose as ordered, milligrams of the drug itself.
  double dose_mg = 0.0;
  /// Prednisone-equivalent milligrams: dose_mg times the dictionary factor.
  double dose = 0.0;
  std::string route;
  Timestamp order_time = 0;

  bool operator==(const MedicationOrder&) const = default;
};

// Stored verbatim.
struct MedicalNote {
  Timestamp note_time = 0;
  std::string text;

  bool operator==(const MedicalNote&) const = default;
};

struct AdmissionEpisode {
  Timestamp admit_time = 0;
  Timestamp discharge_time = 0;
  std::vector<Diagnosis> diagnoses;
  std::vector<LabTest> lab_tests;
  std::vector<Examination> examinations;
  std::vector<MedicationOrder> medication_orders;
  std::vector<MedicalNote> medical_notes;

  Timestamp length_seconds() const { return discharge_time - admit_time; }

  bool operator==(const AdmissionEpisode&) const = default;
};

struct OutcomeLabel {
  bool has_sequela = false;
  std::optional<Timestamp> onset_time;

  bool operator==(const OutcomeLabel&) const = default;
};

struct PatientRecord {
  std::string patient_id;
  int age = 0;
  Gender gender = Gender::other;
  std::vector<AdmissionEpisode> admissions;
  OutcomeLabel outcome;

  bool operator==(const PatientRecord&) const = default;
};

struct DrugInfo {
  HormoneClass hormone_class = HormoneClass::non_hormone;
  double prednisone_factor = 1.0;

  bool operator==(const DrugInfo&) const = default;
};

using DrugDictionary = std::map<std::string, DrugInfo, std::less<>>;

/// Immutable after parse. Patients keyed (and therefore ordered) by id.
struct Corpus {
  std::string schema_version;
  DrugDictionary drug_dictionary;
  std::map<std::string, PatientRecord, std::less<>> patients;

  const PatientRecord& patient(std::string_view id) const;

  bool operator==(const Corpus&) const = default;
};

inline constexpr std::string_view kSchemaVersion = "1.0";

/// Corpus restricted to `ids` (unknown ids are ignored). Shares the dictionary.
Corpus sub_corpus(const Corpus& corpus, const std::vector<std::string>& ids);

// Per-patient derived quantities used by several engines.
double total_stay_days(const PatientRecord& record);
double cumulative_dose(const PatientRecord& record, HormoneClass c);
int order_count(const PatientRecord& record, HormoneClass c);
bool uses_class(const PatientRecord& record, HormoneClass c);
/// Earliest order time of any glucocorticoid, if the patient has one.
std::optional<Timestamp> first_hormone_exposure(const PatientRecord& record);

}  // namespace sequela::ehr
