#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sequela {

/// Base for every engine error. `code()` is the machine-readable name the
/// HTTP layer reports (e.g. "SchemaError", "SingleClassError").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define SEQUELA_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

/// Malformed corpus-JSON. Carries the JSON pointer of the offending value.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error("SchemaError", path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A domain invariant does not hold. Lists the offending patient ids.
class InvariantError : public Error {
 public:
  InvariantError(const std::string& message, std::vector<std::string> patient_ids = {})
      : Error("InvariantError", message), patient_ids_(std::move(patient_ids)) {}

  const std::vector<std::string>& patient_ids() const noexcept { return patient_ids_; }

 private:
  std::vector<std::string> patient_ids_;
};

SEQUELA_DEFINE_ERROR(SpecError);
SEQUELA_DEFINE_ERROR(FilterError);
SEQUELA_DEFINE_ERROR(DegenerateInput);
SEQUELA_DEFINE_ERROR(IndexError);
SEQUELA_DEFINE_ERROR(NotFitted);
SEQUELA_DEFINE_ERROR(InsufficientNegatives);
SEQUELA_DEFINE_ERROR(ConvergenceError);
SEQUELA_DEFINE_ERROR(EmptyGroup);
SEQUELA_DEFINE_ERROR(SingleClassError);
SEQUELA_DEFINE_ERROR(EmptyDataset);
SEQUELA_DEFINE_ERROR(ShapeError);
SEQUELA_DEFINE_ERROR(TooManyFeatures);
SEQUELA_DEFINE_ERROR(StorageError);
SEQUELA_DEFINE_ERROR(NotFound);
SEQUELA_DEFINE_ERROR(UnknownFeature);
SEQUELA_DEFINE_ERROR(NoActiveLayout);
SEQUELA_DEFINE_ERROR(DegeneratePolygon);

#undef SEQUELA_DEFINE_ERROR

}  // namespace sequela
