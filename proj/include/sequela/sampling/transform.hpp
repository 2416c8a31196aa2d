#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/projection/features.hpp"

namespace sequela::sampling {

/// Column statistics learned on a fit set. Apply uses these only.
struct TransformSpec {
  bool standardize = true;
  bool fitted = false;
  std::vector<std::string> input_columns;
  std::vector<std::string> retained;  // input_columns minus constant columns
  std::vector<double> means;          // per retained column, after imputation
  std::vector<double> stds;           // population sd, per retained column
  std::vector<double> medians;        // per input column, fills NaN
};

enum class TransformMode { fit, apply };

struct TransformResult {
  projection::FeatureMatrix matrix;
  TransformSpec spec;
  std::vector<std::string> warnings;
};

/// fit learns the statistics from `m` and transforms it; apply reuses
/// `spec` and throws NotFitted when it has not been fitted. Zero-variance
/// columns are dropped at fit time with a warning.
TransformResult transform_features(const projection::FeatureMatrix& m, TransformSpec spec, TransformMode mode);

nlohmann::json to_json(const TransformSpec& spec);

}  // namespace sequela::sampling
