#include "sequela/api/schema.hpp"

#include <rapidjson/document.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

#include "sequela/error.hpp"

namespace sequela::api {

extern const char* const kApiSchemaText;

struct ApiSchema::Compiled {
  rapidjson::Document source;
  std::unique_ptr<rapidjson::SchemaDocument> schema;
};

namespace {

// A standalone schema document: the route schema's members plus the shared
// definitions, so local "#/definitions/..." references resolve.
std::unique_ptr<ApiSchema::Compiled> compile(const rapidjson::Value& definitions, const rapidjson::Value& route_schema,
                                             auto make) {
  auto c = make();
  auto& doc = c->source;
  doc.SetObject();
  auto& alloc = doc.GetAllocator();
  doc.AddMember("definitions", rapidjson::Value(definitions, alloc), alloc);
  for (auto it = route_schema.MemberBegin(); it != route_schema.MemberEnd(); ++it) {
    doc.AddMember(rapidjson::Value(it->name, alloc), rapidjson::Value(it->value, alloc), alloc);
  }
  c->schema = std::make_unique<rapidjson::SchemaDocument>(doc);
  return c;
}

}  // namespace

ApiSchema::ApiSchema(std::string_view text) {
  rapidjson::Document root;
  root.Parse(text.data(), text.size());
  if (root.HasParseError() || !root.IsObject() || !root.HasMember("routes") || !root.HasMember("definitions")) {
    throw Error("SchemaError", "API schema document is malformed");
  }
  const auto& defs = root["definitions"];
  auto make = [] { return std::make_unique<Compiled>(); };
  for (auto it = root["routes"].MemberBegin(); it != root["routes"].MemberEnd(); ++it) {
    const std::string route = it->name.GetString();
    if (it->value.HasMember("request")) requests_[route] = compile(defs, it->value["request"], make);
    if (it->value.HasMember("response")) responses_[route] = compile(defs, it->value["response"], make);
  }
}

ApiSchema::~ApiSchema() = default;

const ApiSchema& ApiSchema::builtin() {
  static const ApiSchema schema(kApiSchemaText);
  return schema;
}

std::string_view ApiSchema::builtin_text() { return kApiSchemaText; }

bool ApiSchema::has_request_schema(const std::string& route) const { return requests_.count(route) > 0; }
bool ApiSchema::has_response_schema(const std::string& route) const { return responses_.count(route) > 0; }

std::optional<SchemaViolation> ApiSchema::check_request(const std::string& route, const nlohmann::json& doc) const {
  return check(requests_, route, doc);
}

std::optional<SchemaViolation> ApiSchema::check_response(const std::string& route, const nlohmann::json& doc) const {
  return check(responses_, route, doc);
}

std::optional<SchemaViolation> ApiSchema::check(const std::map<std::string, std::unique_ptr<Compiled>>& table,
                                                const std::string& route, const nlohmann::json& doc) const {
  auto it = table.find(route);
  if (it == table.end()) return std::nullopt;
  rapidjson::Document d;
  const auto text = doc.dump();
  d.Parse(text.c_str(), text.size());
  rapidjson::SchemaValidator validator(*it->second->schema);
  if (d.Accept(validator)) return std::nullopt;
  rapidjson::StringBuffer pointer;
  validator.GetInvalidDocumentPointer().Stringify(pointer);
  return SchemaViolation{pointer.GetString(), validator.GetInvalidSchemaKeyword()};
}

}  // namespace sequela::api
