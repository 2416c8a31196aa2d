#pragma once

#include <istream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"

namespace sequela::ehr {

/// Parses corpus-JSON (docs/corpus-format.md) into a validated Corpus.
///
/// Throws SchemaError for missing or mistyped fields (with a JSON pointer),
/// InvariantError when any record fails validate_record, when ids repeat, or
/// when the patient list is empty.
Corpus parse_corpus(std::string_view text);
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_json(const nlohmann::json& doc);

/// Serializes to corpus-JSON. Patients are written in id order, so output is
/// a deterministic function of the Corpus.
std::string serialize_corpus(const Corpus& corpus);
nlohmann::json corpus_to_json(const Corpus& corpus);

nlohmann::json to_json(const PatientRecord& record);
nlohmann::json to_json(const Diagnosis& d);
nlohmann::json to_json(const LabTest& lab);
nlohmann::json to_json(const Examination& exam);
nlohmann::json to_json(const MedicationOrder& order);
nlohmann::json to_json(const MedicalNote& note);

}  // namespace sequela::ehr
