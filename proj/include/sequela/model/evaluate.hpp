#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/model/forest.hpp"

namespace sequela::model {

struct EvalReport {
  std::optional<double> auc;  // nullopt when the test set has one class
  std::uint64_t auc_twice_u = 0;
  std::uint64_t auc_pairs = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  int tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t split_seed = 0;
  double split_fraction = 0.2;

  bool operator==(const EvalReport&) const = default;
};

/// Metrics at threshold 0.5 (score >= 0.5 predicts positive). AUC is the
/// exact rank statistic with midranks. Throws EmptyDataset on empty input.
EvalReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels);

EvalReport evaluate(const Forest& forest, const RowMatrix& x, const std::vector<int>& labels);

struct Split {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
};

/// Per-class shuffle with derive_seed(seed, class); round(fraction * n_class)
/// rows of each class go to test, and at least one when the class has two
/// or more rows.
Split stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed);

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace sequela::model
