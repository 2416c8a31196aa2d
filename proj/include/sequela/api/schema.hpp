#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace sequela::api {

struct SchemaViolation {
  std::string path;     // JSON pointer into the validated document
  std::string keyword;  // failing schema keyword
};

/// Request and response schemas per route, keyed "METHOD /template", e.g.
/// "GET /logs/{id}". Built from docs/api_schema.json.
class ApiSchema {
 public:
  explicit ApiSchema(std::string_view schema_text);
  ~ApiSchema();
  ApiSchema(const ApiSchema&) = delete;
  ApiSchema& operator=(const ApiSchema&) = delete;

  /// The schema document compiled into the library.
  static const ApiSchema& builtin();
  static std::string_view builtin_text();

  bool has_request_schema(const std::string& route) const;
  bool has_response_schema(const std::string& route) const;

  /// nullopt when `doc` conforms or the route has no such schema.
  std::optional<SchemaViolation> check_request(const std::string& route, const nlohmann::json& doc) const;
  std::optional<SchemaViolation> check_response(const std::string& route, const nlohmann::json& doc) const;

  struct Compiled;

 private:
  std::optional<SchemaViolation> check(const std::map<std::string, std::unique_ptr<Compiled>>& table,
                                       const std::string& route, const nlohmann::json& doc) const;

  std::map<std::string, std::unique_ptr<Compiled>> requests_;
  std::map<std::string, std::unique_ptr<Compiled>> responses_;
};

}  // namespace sequela::api
