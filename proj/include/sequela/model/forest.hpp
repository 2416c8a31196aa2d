#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/util/matrix.hpp"

namespace sequela::model {

struct Dataset {
  std::vector<std::string> feature_names;
  RowMatrix x;
  std::vector<int> y;  // 0/1
  std::vector<std::string> row_ids;
};

struct ForestConfig {
  int n_trees = 100;
  std::optional<int> max_depth;
  int min_samples_leaf = 1;
  /// Defaults to ceil(sqrt(p)) when unset.
  std::optional<int> features_per_split;
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;

  bool operator==(const ForestConfig&) const = default;
};

/// Throws SpecError when a field is out of range for `p` features.
void validate_config(const ForestConfig& config, std::size_t p);

ForestConfig forest_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ForestConfig& config);

/// Internal nodes send x[feature] <= threshold left. Leaves have feature -1.
struct Node {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // positive fraction of the samples reaching the node
  double cover = 0.0;  // number of training samples (bootstrap copies counted)

  bool is_leaf() const { return feature < 0; }
};

/// nodes[0] is the root.
struct Tree {
  std::vector<Node> nodes;

  double predict(const double* row) const;
  int depth() const;
  /// Cover-weighted mean of the leaf values.
  double expected_value() const;
};

struct Forest {
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;
  std::string training_fingerprint;

  std::size_t n_features() const { return feature_names.size(); }
};

/// CART with Gini splits. Throws EmptyDataset, SingleClassError, ShapeError.
/// Tree t draws its bootstrap and split candidates from derive_seed(seed, t).
/// `fingerprint` is stored verbatim; see training_fingerprint().
Forest train_forest(const Dataset& data, const ForestConfig& config, std::string fingerprint = {});

/// Mean leaf value over trees for each row. Throws ShapeError on width mismatch.
std::vector<double> predict_proba(const Forest& forest, const RowMatrix& x);

/// SHA-256 over the canonical JSON of the training inputs and the config.
std::string training_fingerprint(const nlohmann::json& inputs, const ForestConfig& config);

/// SHA-256 over every node's fields, bit-exact. Equal digests mean equal models.
std::string model_digest(const Forest& forest);

nlohmann::json to_json(const Tree& tree);
nlohmann::json to_json(const Forest& forest);

}  // namespace sequela::model
