#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"
#include "sequela/util/matrix.hpp"

namespace sequela::projection {

using sequela::RowMatrix;

inline constexpr const char* kFeatureSchemaVersion = "vec-1";

/// Which lab tests get their own columns. Everything else in the schema is
/// fixed.
struct SchemaConfig {
  std::vector<std::string> canonical_labs;
};

/// Canonical labs = every distinct lab test name in the corpus, sorted.
SchemaConfig schema_config_for(const ehr::Corpus& corpus);

/// Ordered column names:
///   age, gender_{female,male,other}, total_stay_days, admission_count,
///   dose_{short,medium,long}_acting, orders_{short,medium,long}_acting,
///   per canonical lab L: lab_L_mean, lab_L_abnormal_frac, lab_L_missing,
///   exam_abnormal_frac, exam_missing.
std::vector<std::string> feature_schema(const SchemaConfig& config);

struct FeatureVector {
  std::string patient_id;
  std::vector<double> values;  // NaN marks a missing lab/exam statistic
};

FeatureVector vectorize_patient(const ehr::PatientRecord& record, const SchemaConfig& config);

struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> columns;
  RowMatrix values;
  /// Median used to fill each column's missing entries (0 where nothing was
  /// missing or nothing was observed).
  std::vector<double> imputed_with;

  std::size_t column_index(const std::string& name) const;  // throws UnknownFeature
  /// Submatrix with the named columns, in the given order.
  FeatureMatrix select_columns(const std::vector<std::string>& names) const;
  FeatureMatrix select_rows(const std::vector<std::string>& ids) const;
};

/// Vectorizes `ids` and fills missing statistics with the column median over
/// those same patients. The result contains no NaN.
FeatureMatrix build_feature_matrix(const ehr::Corpus& corpus, const std::vector<std::string>& ids,
                                   const SchemaConfig& config);

nlohmann::json to_json(const FeatureMatrix& m);

}  // namespace sequela::projection
