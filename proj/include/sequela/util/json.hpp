#pragma once

#include <optional>

#include <nlohmann/json.hpp>

namespace sequela {

/// `null` for an empty optional, the value otherwise.
template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace sequela
