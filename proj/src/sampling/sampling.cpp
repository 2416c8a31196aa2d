#include "sequela/sampling/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include "sequela/error.hpp"
#include "sequela/projection/features.hpp"
#include "sequela/sampling/logistic.hpp"
#include "sequela/sampling/transform.hpp"
#include "sequela/util/seed.hpp"
#include "sequela/util/stats.hpp"

namespace sequela::sampling {

using nlohmann::json;

namespace {

std::vector<std::string> sorted_union(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

projection::FeatureMatrix covariate_matrix(const ehr::Corpus& corpus, const std::vector<std::string>& ids,
                                           const std::vector<std::string>& names) {
  const auto config = projection::schema_config_for(corpus);
  auto full = projection::build_feature_matrix(corpus, ids, config);
  return names.empty() ? full : full.select_columns(names);
}

std::vector<std::string> draw_without_replacement(std::vector<std::string> pool, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void sample_hard_negatives(const ehr::Corpus& corpus, const std::vector<std::string>& positives,
                           const std::vector<std::string>& pool, std::size_t k, const SamplingRequest& req,
                           SamplingResult& out) {
  const std::size_t m = std::min(positives.size(), pool.size() - k);
  if (m == 0) {
    out.sample_set.negatives = pool;
    return;
  }
  out.seed_negatives = draw_without_replacement(pool, m, derive_seed(req.seed, 0));
  std::vector<std::string> remaining;
  std::set_difference(pool.begin(), pool.end(), out.seed_negatives.begin(), out.seed_negatives.end(),
                      std::back_inserter(remaining));

  const auto fm = covariate_matrix(corpus, sorted_union(positives, pool), req.feature_names);
  model::Dataset train;
  train.feature_names = fm.columns;
  train.row_ids = sorted_union(positives, out.seed_negatives);
  const auto rows = fm.select_rows(train.row_ids);
  train.x = rows.values;
  const std::set<std::string> pos(positives.begin(), positives.end());
  for (const auto& id : train.row_ids) train.y.push_back(pos.count(id) ? 1 : 0);
  const auto forest = model::train_forest(train, seed_model_config(req.seed));

  const auto scores = model::predict_proba(forest, fm.select_rows(remaining).values);
  std::vector<std::size_t> order(remaining.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
    out.candidate_scores[remaining[i]] = scores[i];
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return remaining[a] < remaining[b];
  });
  for (std::size_t i = 0; i < k; ++i) out.sample_set.negatives.push_back(remaining[order[i]]);
  std::sort(out.sample_set.negatives.begin(), out.sample_set.negatives.end());
}

void sample_psm(const ehr::Corpus& corpus, const std::vector<std::string>& positives,
                const std::vector<std::string>& pool, const std::vector<std::string>& covariates,
                SamplingResult& out) {
  const auto ids = sorted_union(positives, pool);
  const auto fm = covariate_matrix(corpus, ids, covariates);
  const auto transformed = transform_features(fm, TransformSpec{}, TransformMode::fit);
  const std::set<std::string> pos(positives.begin(), positives.end());
  std::vector<int> treated;
  for (const auto& id : ids) treated.push_back(pos.count(id) ? 1 : 0);
  const auto fit = fit_logistic(transformed.matrix.values, treated);

  std::vector<double> logit(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    logit[i] = fit.linear_predictor(transformed.matrix.values.row(static_cast<Eigen::Index>(i)).data());
    out.logits[ids[i]] = logit[i];
  }
  out.caliper = 0.2 * std::sqrt(stats::variance(logit, ids.size() > 1 ? 1 : 0));

  std::vector<std::size_t> treated_rows, control_rows;
  for (std::size_t i = 0; i < ids.size(); ++i) (treated[i] ? treated_rows : control_rows).push_back(i);
  // Highest propensity first; those are the hardest to match.
  std::stable_sort(treated_rows.begin(), treated_rows.end(),
                   [&](std::size_t a, std::size_t b) { return logit[a] > logit[b]; });
  std::vector<bool> used(ids.size(), false);
  for (std::size_t t : treated_rows) {
    std::optional<std::size_t> best;
    double best_d = 0.0;
    for (std::size_t c : control_rows) {
      if (used[c]) continue;
      const double d = std::abs(logit[t] - logit[c]);
      if (!best || d < best_d) {
        best = c;
        best_d = d;
      }
    }
    if (best && best_d <= out.caliper) {
      used[*best] = true;
      out.pairs.push_back({ids[t], ids[*best], best_d});
      out.sample_set.positives.push_back(ids[t]);
      out.sample_set.negatives.push_back(ids[*best]);
    } else {
      out.unmatched_positives.push_back(ids[t]);
    }
  }
  std::sort(out.sample_set.positives.begin(), out.sample_set.positives.end());
  std::sort(out.sample_set.negatives.begin(), out.sample_set.negatives.end());
  std::sort(out.unmatched_positives.begin(), out.unmatched_positives.end());
}

std::vector<double> column_values(const projection::FeatureMatrix& m, const std::vector<std::string>& ids,
                                  std::size_t col) {
  std::unordered_map<std::string_view, Eigen::Index> index;
  for (std::size_t i = 0; i < m.row_ids.size(); ++i) index.emplace(m.row_ids[i], static_cast<Eigen::Index>(i));
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(m.values(index.at(id), static_cast<Eigen::Index>(col)));
  return out;
}

double mean_abs(const std::vector<CovariateBalance>& rows, bool before) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    const auto& v = before ? r.smd_before : r.smd_after;
    if (v) {
      sum += std::abs(*v);
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::random: return "random";
    case Strategy::hard_negative: return "hard_negative";
    case Strategy::psm: return "psm";
    case Strategy::manual: return "manual";
  }
  return "manual";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  for (auto v : {Strategy::random, Strategy::hard_negative, Strategy::psm, Strategy::manual}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

json to_json(const SampleSet& s) {
  return {{"positives", s.positives},
          {"negatives", s.negatives},
          {"feature_names", s.feature_names},
          {"strategy", to_string(s.strategy)},
          {"strategy_params", s.strategy_params},
          {"seed", s.rng_seed}};
}

SampleSet sample_set_from_json(const json& j) {
  SampleSet s;
  s.positives = j.at("positives").get<std::vector<std::string>>();
  s.negatives = j.at("negatives").get<std::vector<std::string>>();
  s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (!strategy) throw SpecError("unknown strategy " + j.at("strategy").dump());
  s.strategy = *strategy;
  s.strategy_params = j.value("strategy_params", json::object());
  s.rng_seed = j.at("seed").get<std::uint64_t>();
  return s;
}

std::vector<std::string> extract_positives(const ehr::Corpus& corpus, const std::vector<std::string>& selection) {
  std::vector<std::string> out;
  for (const auto& id : selection) {
    const auto& r = corpus.patient(id);
    if (!r.outcome.has_sequela || !r.outcome.onset_time) continue;
    const auto exposure = ehr::first_hormone_exposure(r);
    if (exposure && *exposure < *r.outcome.onset_time) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> negative_pool(const ehr::Corpus& corpus, const std::vector<std::string>& selection) {
  std::vector<std::string> out;
  for (const auto& id : selection) {
    if (!corpus.patient(id).outcome.has_sequela) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

model::ForestConfig seed_model_config(std::uint64_t seed) {
  model::ForestConfig c;
  c.n_trees = 25;
  c.max_depth = 6;
  c.min_samples_leaf = 2;
  c.rng_seed = derive_seed(seed, 1);
  return c;
}

SamplingResult sample_negatives(const ehr::Corpus& corpus, const std::vector<std::string>& selection,
                                const std::vector<std::string>& positives_in, const SamplingRequest& req) {
  std::vector<std::string> positives = positives_in;
  std::sort(positives.begin(), positives.end());
  positives.erase(std::unique(positives.begin(), positives.end()), positives.end());
  for (const auto& id : positives) corpus.patient(id);

  std::vector<std::string> pool;
  const auto labeled_negative = negative_pool(corpus, selection);
  std::set_difference(labeled_negative.begin(), labeled_negative.end(), positives.begin(), positives.end(),
                      std::back_inserter(pool));

  const int k = req.k.value_or(static_cast<int>(positives.size()));
  if (k < 1) throw SpecError("k must be >= 1");
  if (static_cast<std::size_t>(k) > pool.size()) {
    throw InsufficientNegatives("requested " + std::to_string(k) + " negatives, " + std::to_string(pool.size()) +
                                " available");
  }
  if (positives.empty() && (req.strategy == Strategy::hard_negative || req.strategy == Strategy::psm)) {
    throw EmptyGroup(std::string(to_string(req.strategy)) + " needs at least one positive");
  }
  const auto schema = projection::feature_schema(projection::schema_config_for(corpus));
  for (const auto* names : {&req.feature_names, &req.covariates}) {
    for (const auto& n : *names) {
      if (std::find(schema.begin(), schema.end(), n) == schema.end()) throw UnknownFeature("unknown feature: " + n);
    }
  }

  SamplingResult out;
  auto& s = out.sample_set;
  s.feature_names = req.feature_names;
  s.strategy = req.strategy;
  s.rng_seed = req.seed;
  s.strategy_params = {{"k", k}};
  switch (req.strategy) {
    case Strategy::random:
    case Strategy::manual:
      s.positives = positives;
      s.negatives = draw_without_replacement(pool, static_cast<std::size_t>(k), derive_seed(req.seed, 0));
      break;
    case Strategy::hard_negative:
      s.positives = positives;
      sample_hard_negatives(corpus, positives, pool, static_cast<std::size_t>(k), req, out);
      s.strategy_params["seed_model"] = model::to_json(seed_model_config(req.seed));
      break;
    case Strategy::psm: {
      const auto& covariates = req.covariates.empty() ? req.feature_names : req.covariates;
      sample_psm(corpus, positives, pool, covariates, out);
      s.strategy_params["caliper"] = out.caliper;
      s.strategy_params["covariates"] = covariates;
      s.strategy_params["unmatched_positives"] = out.unmatched_positives;
      break;
    }
  }
  return out;
}

std::optional<double> standardized_mean_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw EmptyGroup("standardized mean difference needs two non-empty groups");
  const double ma = stats::mean(a), mb = stats::mean(b);
  const double va = stats::variance(a, a.size() > 1 ? 1 : 0);
  const double vb = stats::variance(b, b.size() > 1 ? 1 : 0);
  const double pooled = std::sqrt((va + vb) / 2.0);
  if (pooled == 0.0) {
    if (ma == mb) return 0.0;
    return std::nullopt;
  }
  return (ma - mb) / pooled;
}

BalanceReport balance_report(const ehr::Corpus& corpus, const std::vector<std::string>& selection,
                             const SampleSet& s, const std::vector<std::string>& covariates) {
  if (s.positives.empty() || s.negatives.empty()) throw EmptyGroup("sample set has an empty group");
  const auto all_pos = extract_positives(corpus, selection);
  std::vector<std::string> all_neg;
  const auto labeled_negative = negative_pool(corpus, selection);
  std::set_difference(labeled_negative.begin(), labeled_negative.end(), all_pos.begin(), all_pos.end(),
                      std::back_inserter(all_neg));
  if (all_pos.empty() || all_neg.empty()) throw EmptyGroup("selection lacks positives or negatives");

  auto ids = sorted_union(sorted_union(all_pos, all_neg), sorted_union(s.positives, s.negatives));
  const auto fm = covariate_matrix(corpus, ids, covariates);
  BalanceReport r;
  for (std::size_t j = 0; j < fm.columns.size(); ++j) {
    CovariateBalance row;
    row.name = fm.columns[j];
    row.smd_before = standardized_mean_difference(column_values(fm, all_pos, j), column_values(fm, all_neg, j));
    row.smd_after = standardized_mean_difference(column_values(fm, s.positives, j), column_values(fm, s.negatives, j));
    r.covariates.push_back(std::move(row));
  }
  r.mean_abs_smd_before = mean_abs(r.covariates, true);
  r.mean_abs_smd_after = mean_abs(r.covariates, false);
  return r;
}

json to_json(const BalanceReport& r) {
  json rows = json::array();
  for (const auto& c : r.covariates) {
    rows.push_back({{"name", c.name},
                    {"smd_before", c.smd_before ? json(*c.smd_before) : json(nullptr)},
                    {"smd_after", c.smd_after ? json(*c.smd_after) : json(nullptr)}});
  }
  return {{"covariates", std::move(rows)},
          {"mean_abs_smd_before", r.mean_abs_smd_before},
          {"mean_abs_smd_after", r.mean_abs_smd_after}};
}

json to_json(const SamplingResult& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"positive", p.positive}, {"negative", p.negative}, {"logit_distance", p.logit_distance}});
  }
  json out = {{"sample_set", to_json(r.sample_set)}};
  if (r.sample_set.strategy == Strategy::hard_negative) {
    out["seed_negatives"] = r.seed_negatives;
    out["candidate_scores"] = r.candidate_scores;
  }
  if (r.sample_set.strategy == Strategy::psm) {
    out["pairs"] = std::move(pairs);
    out["unmatched_positives"] = r.unmatched_positives;
    out["caliper"] = r.caliper;
  }
  return out;
}

}  // namespace sequela::sampling
