#include "sequela/model/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sequela/error.hpp"
#include "sequela/util/json.hpp"
#include "sequela/util/seed.hpp"
#include "sequela/util/stats.hpp"

namespace sequela::model {

EvalReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.empty()) throw EmptyDataset("test set is empty");
  if (scores.size() != labels.size()) throw ShapeError("score and label counts differ");
  EvalReport r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= 0.5;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++r.tp;
    if (predicted && !actual) ++r.fp;
    if (!predicted && !actual) ++r.tn;
    if (!predicted && actual) ++r.fn;
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(scores.size());
  const int denom = 2 * r.tp + r.fp + r.fn;
  r.f1 = denom > 0 ? 2.0 * r.tp / denom : 0.0;
  if (auto auc = stats::rank_auc(scores, labels)) {
    r.auc = auc->auc;
    r.auc_twice_u = auc->twice_u;
    r.auc_pairs = auc->pairs;
  }
  return r;
}

EvalReport evaluate(const Forest& forest, const RowMatrix& x, const std::vector<int>& labels) {
  return evaluate_scores(predict_proba(forest, x), labels);
}

Split stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw SpecError("split fraction must be in (0, 1)");
  Split s;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) rows.push_back(i);
    }
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    if (rows.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    s.test.insert(s.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"auc", optional_json(r.auc)},
          {"auc_twice_u", r.auc_twice_u},
          {"auc_pairs", r.auc_pairs},
          {"accuracy", r.accuracy},
          {"f1", r.f1},
          {"confusion", {{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}}},
          {"split_seed", r.split_seed},
          {"split_fraction", r.split_fraction}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  if (!j.at("auc").is_null()) r.auc = j.at("auc").get<double>();
  r.auc_twice_u = j.at("auc_twice_u").get<std::uint64_t>();
  r.auc_pairs = j.at("auc_pairs").get<std::uint64_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.f1 = j.at("f1").get<double>();
  const auto& c = j.at("confusion");
  r.tp = c.at("tp").get<int>();
  r.fp = c.at("fp").get<int>();
  r.tn = c.at("tn").get<int>();
  r.fn = c.at("fn").get<int>();
  r.split_seed = j.at("split_seed").get<std::uint64_t>();
  r.split_fraction = j.at("split_fraction").get<double>();
  return r;
}

}  // namespace sequela::model
