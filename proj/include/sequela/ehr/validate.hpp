#pragma once

#include <string>
#include <vector>

#include "sequela/ehr/record.hpp"

namespace sequela::ehr {

struct Violation {
  std::string field;  // e.g. "admissions[1].medication_orders[0].drug_name"
  std::string rule;   // e.g. "drug not in dictionary"

  bool operator==(const Violation&) const = default;
};

/// Checks every PatientRecord / AdmissionEpisode invariant. Empty iff valid.
std::vector<Violation> validate_record(const PatientRecord& record, const DrugDictionary& dict);

/// True if `id` matches one of the direct-identifier deny patterns
/// (national id numbers, SSN, phone numbers, e-mail, "Given Family" names).
bool looks_like_direct_identifier(const std::string& id);

}  // namespace sequela::ehr
