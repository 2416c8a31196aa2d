#include "sequela/sampling/transform.hpp"

#include <cmath>

#include "sequela/error.hpp"
#include "sequela/util/stats.hpp"

namespace sequela::sampling {

namespace {

projection::FeatureMatrix apply_spec(const projection::FeatureMatrix& m, const TransformSpec& spec) {
  projection::FeatureMatrix out;
  out.row_ids = m.row_ids;
  out.columns = spec.retained;
  out.values.resize(m.values.rows(), static_cast<Eigen::Index>(spec.retained.size()));
  out.imputed_with.assign(spec.retained.size(), 0.0);
  std::size_t k = 0;
  for (std::size_t j = 0; j < spec.input_columns.size(); ++j) {
    if (k >= spec.retained.size() || spec.input_columns[j] != spec.retained[k]) continue;
    const auto src = static_cast<Eigen::Index>(m.column_index(spec.input_columns[j]));
    const auto dst = static_cast<Eigen::Index>(k);
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      double x = m.values(i, src);
      if (std::isnan(x)) x = spec.medians[j];
      if (spec.standardize) x = (x - spec.means[k]) / spec.stds[k];
      out.values(i, dst) = x;
    }
    out.imputed_with[k] = spec.medians[j];
    ++k;
  }
  return out;
}

}  // namespace

TransformResult transform_features(const projection::FeatureMatrix& m, TransformSpec spec, TransformMode mode) {
  TransformResult result;
  if (mode == TransformMode::apply) {
    if (!spec.fitted) throw NotFitted("transform applied before fit");
    result.matrix = apply_spec(m, spec);
    result.spec = std::move(spec);
    return result;
  }
  if (m.values.rows() == 0) throw EmptyDataset("cannot fit a transform on zero rows");

  spec.input_columns = m.columns;
  spec.retained.clear();
  spec.means.clear();
  spec.stds.clear();
  spec.medians.clear();
  for (std::size_t j = 0; j < m.columns.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    std::vector<double> observed;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      if (!std::isnan(m.values(i, col))) observed.push_back(m.values(i, col));
    }
    const double median = observed.empty() ? 0.0 : stats::median(observed);
    spec.medians.push_back(median);
    std::vector<double> filled(static_cast<std::size_t>(m.values.rows()));
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      const double x = m.values(i, col);
      filled[static_cast<std::size_t>(i)] = std::isnan(x) ? median : x;
    }
    const double mean = stats::mean(filled);
    const double sd = std::sqrt(stats::variance(filled, 0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      result.warnings.push_back("dropped constant column " + m.columns[j]);
      continue;
    }
    spec.retained.push_back(m.columns[j]);
    spec.means.push_back(mean);
    spec.stds.push_back(sd);
  }
  spec.fitted = true;
  result.matrix = apply_spec(m, spec);
  result.spec = std::move(spec);
  return result;
}

nlohmann::json to_json(const TransformSpec& s) {
  return {{"standardize", s.standardize}, {"fitted", s.fitted},   {"input_columns", s.input_columns},
          {"retained", s.retained},       {"means", s.means},     {"stds", s.stds},
          {"medians", s.medians}};
}

}  // namespace sequela::sampling
