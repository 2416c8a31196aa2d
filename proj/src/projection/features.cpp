#include "sequela/projection/features.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "sequela/error.hpp"
#include "sequela/util/stats.hpp"

namespace sequela::projection {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

SchemaConfig schema_config_for(const ehr::Corpus& corpus) {
  std::set<std::string> labs;
  for (const auto& [id, p] : corpus.patients) {
    for (const auto& a : p.admissions) {
      for (const auto& l : a.lab_tests) labs.insert(l.test_name);
    }
  }
  return {std::vector<std::string>(labs.begin(), labs.end())};
}

std::vector<std::string> feature_schema(const SchemaConfig& config) {
  std::vector<std::string> names = {"age", "gender_female", "gender_male", "gender_other",
                                    "total_stay_days", "admission_count"};
  for (auto c : ehr::kHormoneClasses) names.push_back("dose_" + std::string(ehr::to_string(c)));
  for (auto c : ehr::kHormoneClasses) names.push_back("orders_" + std::string(ehr::to_string(c)));
  for (const auto& lab : config.canonical_labs) {
    names.push_back("lab_" + lab + "_mean");
    names.push_back("lab_" + lab + "_abnormal_frac");
    names.push_back("lab_" + lab + "_missing");
  }
  names.push_back("exam_abnormal_frac");
  names.push_back("exam_missing");
  return names;
}

FeatureVector vectorize_patient(const ehr::PatientRecord& r, const SchemaConfig& config) {
  FeatureVector v;
  v.patient_id = r.patient_id;
  auto& x = v.values;
  x.push_back(r.age);
  x.push_back(r.gender == ehr::Gender::female ? 1.0 : 0.0);
  x.push_back(r.gender == ehr::Gender::male ? 1.0 : 0.0);
  x.push_back(r.gender == ehr::Gender::other ? 1.0 : 0.0);
  x.push_back(ehr::total_stay_days(r));
  x.push_back(static_cast<double>(r.admissions.size()));
  for (auto c : ehr::kHormoneClasses) x.push_back(ehr::cumulative_dose(r, c));
  for (auto c : ehr::kHormoneClasses) x.push_back(ehr::order_count(r, c));

  struct LabAccum {
    double sum = 0.0;
    int n = 0;
    int abnormal = 0;
  };
  std::unordered_map<std::string, LabAccum> labs;
  int exams = 0, abnormal_exams = 0;
  for (const auto& a : r.admissions) {
    for (const auto& l : a.lab_tests) {
      auto& acc = labs[l.test_name];
      acc.sum += l.value;
      ++acc.n;
      acc.abnormal += l.is_abnormal() ? 1 : 0;
    }
    for (const auto& e : a.examinations) {
      ++exams;
      abnormal_exams += e.result_flag == ehr::ResultFlag::abnormal ? 1 : 0;
    }
  }
  for (const auto& name : config.canonical_labs) {
    auto it = labs.find(name);
    if (it == labs.end() || it->second.n == 0) {
      x.insert(x.end(), {kNaN, kNaN, 1.0});
    } else {
      const double n = it->second.n;
      x.insert(x.end(), {it->second.sum / n, it->second.abnormal / n, 0.0});
    }
  }
  if (exams == 0) {
    x.insert(x.end(), {kNaN, 1.0});
  } else {
    x.insert(x.end(), {static_cast<double>(abnormal_exams) / exams, 0.0});
  }
  return v;
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == name) return j;
  }
  throw UnknownFeature("unknown feature: " + name);
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& names) const {
  FeatureMatrix out;
  out.row_ids = row_ids;
  out.columns = names;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto j = column_index(names[k]);
    out.values.col(static_cast<Eigen::Index>(k)) = values.col(static_cast<Eigen::Index>(j));
    out.imputed_with.push_back(imputed_with.empty() ? 0.0 : imputed_with[j]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < row_ids.size(); ++i) index.emplace(row_ids[i], static_cast<Eigen::Index>(i));
  FeatureMatrix out;
  out.columns = columns;
  out.imputed_with = imputed_with;
  out.row_ids = ids;
  out.values.resize(static_cast<Eigen::Index>(ids.size()), values.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = index.find(ids[i]);
    if (it == index.end()) throw NotFound("row not in feature matrix: " + ids[i]);
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(it->second);
  }
  return out;
}

FeatureMatrix build_feature_matrix(const ehr::Corpus& corpus, const std::vector<std::string>& ids,
                                   const SchemaConfig& config) {
  FeatureMatrix m;
  m.columns = feature_schema(config);
  m.row_ids = ids;
  const auto p = static_cast<Eigen::Index>(m.columns.size());
  m.values.resize(static_cast<Eigen::Index>(ids.size()), p);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto v = vectorize_patient(corpus.patient(ids[i]), config);
    m.values.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(v.values.data(), p);
  }

  m.imputed_with.assign(m.columns.size(), 0.0);
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> observed;
    bool any_missing = false;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      const double x = m.values(i, j);
      if (std::isnan(x)) {
        any_missing = true;
      } else {
        observed.push_back(x);
      }
    }
    if (!any_missing) continue;
    const double fill = observed.empty() ? 0.0 : stats::median(std::move(observed));
    m.imputed_with[static_cast<std::size_t>(j)] = fill;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      if (std::isnan(m.values(i, j))) m.values(i, j) = fill;
    }
  }
  return m;
}

nlohmann::json to_json(const FeatureMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    std::vector<double> r(m.values.row(i).begin(), m.values.row(i).end());
    rows.push_back({{"patient_id", m.row_ids[static_cast<std::size_t>(i)]}, {"values", r}});
  }
  return {{"schema_version", kFeatureSchemaVersion}, {"columns", m.columns}, {"rows", std::move(rows)}};
}

}  // namespace sequela::projection
