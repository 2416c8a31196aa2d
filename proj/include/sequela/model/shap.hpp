#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/model/forest.hpp"

namespace sequela::model {

inline constexpr const char* kShapVariant = "path_dependent";

struct ShapMatrix {
  std::vector<std::string> feature_names;
  RowMatrix values;  // instances x features
  /// Cover-weighted root expectation averaged over trees. base_value plus a
  /// row's values equals the forest prediction for that row.
  double base_value = 0.0;
  /// Mean forest prediction over the background rows. Reported only.
  double background_mean_prediction = 0.0;
  std::string variant = kShapVariant;
};

/// Path-dependent TreeSHAP. Throws ShapeError on width mismatch or an empty
/// background.
ShapMatrix shap_values(const Forest& forest, const RowMatrix& instances, const RowMatrix& background);

/// Exact values for one tree and one instance, in O(L D^2).
std::vector<double> tree_shap(const Tree& tree, const double* row, std::size_t p);

/// Reference implementation: enumerates all 2^p coalitions of the same
/// cover-weighted game. Throws TooManyFeatures when p > 12.
std::vector<double> shap_brute_force(const Tree& tree, const double* row, std::size_t p);
std::vector<double> shap_brute_force(const Forest& forest, const double* row);

/// Cover-weighted expectation of the tree when only the features in
/// `known` (bit j = feature j) are fixed to the instance's values.
double coalition_value(const Tree& tree, const double* row, unsigned known);

/// Per-feature mean |phi| over the rows, in feature order.
std::vector<double> mean_abs_shap(const ShapMatrix& shap);

nlohmann::json to_json(const ShapMatrix& shap, const std::vector<std::string>& row_ids);

}  // namespace sequela::model
