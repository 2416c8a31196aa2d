#include "sequela/pipeline/round_runner.hpp"

#include <algorithm>
#include <set>

#include "sequela/error.hpp"
#include "sequela/projection/projection.hpp"
#include "sequela/util/stats.hpp"

namespace sequela::pipeline {

using nlohmann::json;

namespace {

projection::FeatureMatrix take_rows(const projection::FeatureMatrix& m, const std::vector<std::size_t>& rows) {
  std::vector<std::string> ids;
  for (auto r : rows) ids.push_back(m.row_ids[r]);
  return m.select_rows(ids);
}

json box_json(const BoxStats& b) {
  return {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}, {"n", b.n}};
}

const char* tag_of(int label) { return label ? kPositiveTag : kNegativeTag; }
const char* color_of(int label) { return label ? kPositiveColor : kNegativeColor; }

}  // namespace

json fingerprint_inputs(const sampling::SampleSet& s, std::uint64_t split_seed, double split_fraction) {
  return {{"sample_set", sampling::to_json(s)},
          {"split_seed", split_seed},
          {"split_fraction", split_fraction},
          {"feature_schema_version", projection::kFeatureSchemaVersion}};
}

RoundArtifacts train_round(const ehr::Corpus& corpus, const TrainRequest& req) {
  const auto& s = req.sample_set;
  if (s.positives.empty()) throw SingleClassError("sample set has no positives");
  if (s.negatives.empty()) throw SingleClassError("sample set has no negatives");
  const std::set<std::string> pos(s.positives.begin(), s.positives.end());
  for (const auto& id : s.negatives) {
    if (pos.count(id)) throw InvariantError("patient is both positive and negative", {id});
  }

  RoundArtifacts a;
  std::vector<std::string> ids(s.positives.begin(), s.positives.end());
  ids.insert(ids.end(), s.negatives.begin(), s.negatives.end());
  std::sort(ids.begin(), ids.end());
  const auto full = projection::build_feature_matrix(corpus, ids, projection::schema_config_for(corpus));
  a.raw = s.feature_names.empty() ? full : full.select_columns(s.feature_names);
  for (const auto& id : a.raw.row_ids) a.labels.push_back(pos.count(id) ? 1 : 0);

  a.split = model::stratified_split(a.labels, req.split_fraction, req.split_seed);
  if (a.split.train.empty() || a.split.test.empty()) throw EmptyDataset("split left an empty train or test set");
  const auto fit = sampling::transform_features(take_rows(a.raw, a.split.train), sampling::TransformSpec{},
                                                sampling::TransformMode::fit);
  if (fit.spec.retained.empty()) throw EmptyDataset("every feature is constant on the training rows");
  a.transform = fit.spec;
  const auto test = sampling::transform_features(take_rows(a.raw, a.split.test), a.transform,
                                                 sampling::TransformMode::apply);

  model::Dataset train;
  train.feature_names = fit.matrix.columns;
  train.x = fit.matrix.values;
  train.row_ids = fit.matrix.row_ids;
  for (auto r : a.split.train) train.y.push_back(a.labels[r]);

  auto& round = a.round;
  round.created_at = req.created_at;
  round.sample_set = s;
  round.forest_config = req.forest_config;
  round.split_seed = req.split_seed;
  round.split_fraction = req.split_fraction;
  round.feature_schema_version = projection::kFeatureSchemaVersion;
  round.training_fingerprint =
      model::training_fingerprint(fingerprint_inputs(s, req.split_seed, req.split_fraction), req.forest_config);
  a.forest = model::train_forest(train, req.forest_config, round.training_fingerprint);
  round.model_digest = model::model_digest(a.forest);
  round.model_features = a.forest.feature_names;

  a.x_test = test.matrix.values;
  a.test_ids = test.matrix.row_ids;
  for (auto r : a.split.test) a.test_labels.push_back(a.labels[r]);
  auto eval = model::evaluate(a.forest, a.x_test, a.test_labels);
  eval.split_seed = req.split_seed;
  eval.split_fraction = req.split_fraction;
  round.eval = eval;

  a.shap = model::shap_values(a.forest, a.x_test, train.x);
  const auto importance = model::mean_abs_shap(a.shap);
  for (std::size_t j = 0; j < importance.size(); ++j) {
    round.shap_summary.push_back({round.model_features[j], importance[j]});
  }
  round.status = logstore::RoundStatus::complete;
  return a;
}

RoundArtifacts replay_round(const ehr::Corpus& corpus, const logstore::ModelRound& stored) {
  TrainRequest req;
  req.sample_set = stored.sample_set;
  req.forest_config = stored.forest_config;
  req.split_seed = stored.split_seed;
  req.split_fraction = stored.split_fraction;
  req.created_at = stored.created_at;
  auto a = train_round(corpus, req);
  a.round.round_id = stored.round_id;
  return a;
}

bool same_result(const logstore::ModelRound& a, const logstore::ModelRound& b) {
  return a.training_fingerprint == b.training_fingerprint && a.model_digest == b.model_digest && a.eval == b.eval;
}

BoxStats box_stats(std::vector<double> xs) {
  BoxStats b;
  b.n = xs.size();
  std::sort(xs.begin(), xs.end());
  b.min = xs.front();
  b.max = xs.back();
  b.q1 = stats::quantile(xs, 0.25);
  b.median = stats::quantile(xs, 0.5);
  b.q3 = stats::quantile(xs, 0.75);
  return b;
}

json modeling_view_data(const RoundArtifacts& a) {
  const auto& raw = a.raw;
  json features = raw.columns;

  json pc_rows = json::array();
  for (std::size_t t = 0; t < a.split.test.size(); ++t) {
    const auto r = static_cast<Eigen::Index>(a.split.test[t]);
    std::vector<double> values(raw.values.row(r).begin(), raw.values.row(r).end());
    pc_rows.push_back({{"patient_id", raw.row_ids[a.split.test[t]]},
                       {"tag", tag_of(a.labels[a.split.test[t]])},
                       {"values", std::move(values)}});
  }

  json beeswarm = json::array();
  for (std::size_t j = 0; j < a.forest.feature_names.size(); ++j) {
    const auto& name = a.forest.feature_names[j];
    const auto raw_col = static_cast<Eigen::Index>(raw.column_index(name));
    for (std::size_t t = 0; t < a.split.test.size(); ++t) {
      beeswarm.push_back({{"feature", name},
                          {"patient_id", a.test_ids[t]},
                          {"phi", a.shap.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j))},
                          {"value", raw.values(static_cast<Eigen::Index>(a.split.test[t]), raw_col)}});
    }
  }

  json boxes = json::object();
  for (std::size_t j = 0; j < raw.columns.size(); ++j) {
    std::vector<double> by_class[2];
    for (Eigen::Index i = 0; i < raw.values.rows(); ++i) {
      by_class[a.labels[static_cast<std::size_t>(i)]].push_back(raw.values(i, static_cast<Eigen::Index>(j)));
    }
    boxes[raw.columns[j]] = {
        {kPositiveTag, by_class[1].empty() ? json(nullptr) : box_json(box_stats(by_class[1]))},
        {kNegativeTag, by_class[0].empty() ? json(nullptr) : box_json(box_stats(by_class[0]))}};
  }

  json scatter = json::array();
  const auto layout = projection::run_pca(raw);
  std::vector<bool> in_test(raw.row_ids.size(), false);
  for (auto r : a.split.test) in_test[r] = true;
  for (std::size_t i = 0; i < raw.row_ids.size(); ++i) {
    scatter.push_back({{"patient_id", raw.row_ids[i]},
                       {"x", layout.coords(static_cast<Eigen::Index>(i), 0)},
                       {"y", layout.coords(static_cast<Eigen::Index>(i), 1)},
                       {"tag", tag_of(a.labels[i])},
                       {"color", color_of(a.labels[i])},
                       {"split", in_test[i] ? "test" : "train"}});
  }

  json importance = json::array();
  auto ranked = a.round.shap_summary;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.mean_abs_shap > y.mean_abs_shap; });
  for (const auto& f : ranked) importance.push_back({{"feature", f.feature}, {"mean_abs_shap", f.mean_abs_shap}});

  return {{"round_id", a.round.round_id},
          {"features", std::move(features)},
          {"model_features", a.forest.feature_names},
          {"parallel_coordinates", {{"features", raw.columns}, {"rows", std::move(pc_rows)}}},
          {"beeswarm", std::move(beeswarm)},
          {"box_stats", std::move(boxes)},
          {"scatter", std::move(scatter)},
          {"shap_base_value", a.shap.base_value},
          {"shap_variant", a.shap.variant},
          {"importance", std::move(importance)},
          {"eval", a.round.eval ? model::to_json(*a.round.eval) : json(nullptr)}};
}

}  // namespace sequela::pipeline
