#include "sequela/model/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "sequela/error.hpp"
#include "sequela/util/digest.hpp"
#include "sequela/util/json.hpp"
#include "sequela/util/seed.hpp"

namespace sequela::model {

namespace {

// n * gini(n, pos)
double weighted_gini(double n, double pos) {
  if (n <= 0.0) return 0.0;
  const double neg = n - pos;
  return n - (pos * pos + neg * neg) / n;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestConfig& config, int features_per_split, std::uint64_t seed)
      : data_(data), config_(config), mtry_(features_per_split), rng_(seed) {
    candidates_.resize(data.x.cols());
    std::iota(candidates_.begin(), candidates_.end(), 0);
  }

  Tree build(std::vector<int> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(std::vector<int>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double pos = 0.0;
    for (int r : rows) pos += data_.y[static_cast<std::size_t>(r)];
    const double n = static_cast<double>(rows.size());
    tree_.nodes[id].value = pos / n;
    tree_.nodes[id].cover = n;

    const bool pure = pos == 0.0 || pos == n;
    const bool depth_cap = config_.max_depth && depth >= *config_.max_depth;
    if (pure || depth_cap || rows.size() < 2 * static_cast<std::size_t>(config_.min_samples_leaf)) return id;

    const Split split = best_split(rows, pos);
    if (split.feature < 0) return id;

    std::vector<int> left, right;
    for (int r : rows) {
      (data_.x(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int rgt = grow(right, depth + 1);
    Node& node = tree_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }

  Split best_split(const std::vector<int>& rows, double pos) {
    // Partial Fisher-Yates for the candidate features, then ascending order
    // so ties resolve to the lowest feature index.
    const int p = static_cast<int>(candidates_.size());
    for (int k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<int> pick(k, p - 1);
      std::swap(candidates_[k], candidates_[pick(rng_)]);
    }
    std::vector<int> chosen(candidates_.begin(), candidates_.begin() + mtry_);
    std::sort(chosen.begin(), chosen.end());

    const double n = static_cast<double>(rows.size());
    const double parent = weighted_gini(n, pos);
    const auto min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);
    Split best;
    std::vector<std::pair<double, int>> column(rows.size());
    for (int f : chosen) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {data_.x(rows[i], f), data_.y[static_cast<std::size_t>(rows[i])]};
      }
      std::sort(column.begin(), column.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        const double a = column[i].first, b = column[i + 1].first;
        if (a == b) continue;
        const std::size_t nl = i + 1, nr = column.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double gain = parent - weighted_gini(static_cast<double>(nl), left_pos) -
                            weighted_gini(static_cast<double>(nr), pos - left_pos);
        if (gain > best.gain && gain > 1e-12 * n) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {f, mid, gain};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const ForestConfig& config_;
  int mtry_;
  std::mt19937_64 rng_;
  std::vector<int> candidates_;
  Tree tree_;
};

void put_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a;", v);
  out += buf;
}

}  // namespace

double Tree::predict(const double* row) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    i = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double Tree::expected_value() const {
  double sum = 0.0;
  for (const auto& n : nodes) {
    if (n.is_leaf()) sum += n.value * n.cover;
  }
  return sum / nodes.front().cover;
}

void validate_config(const ForestConfig& c, std::size_t p) {
  if (c.n_trees < 1) throw SpecError("n_trees must be >= 1");
  if (c.max_depth && *c.max_depth < 0) throw SpecError("max_depth must be >= 0");
  if (c.min_samples_leaf < 1) throw SpecError("min_samples_leaf must be >= 1");
  if (c.features_per_split && (*c.features_per_split < 1 || static_cast<std::size_t>(*c.features_per_split) > p)) {
    throw SpecError("features_per_split must be in [1, " + std::to_string(p) + "]");
  }
}

ForestConfig forest_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("forest config must be an object");
  ForestConfig c;
  try {
    c.n_trees = j.value("n_trees", c.n_trees);
    if (j.contains("max_depth") && !j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<int>();
    c.min_samples_leaf = j.value("min_samples_leaf", c.min_samples_leaf);
    if (j.contains("features_per_split") && !j.at("features_per_split").is_null()) {
      c.features_per_split = j.at("features_per_split").get<int>();
    }
    c.bootstrap = j.value("bootstrap", c.bootstrap);
    c.rng_seed = j.value("seed", c.rng_seed);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("bad forest config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const ForestConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", optional_json(c.max_depth)},
          {"min_samples_leaf", c.min_samples_leaf},
          {"features_per_split", optional_json(c.features_per_split)},
          {"bootstrap", c.bootstrap},
          {"seed", c.rng_seed}};
}

Forest train_forest(const Dataset& data, const ForestConfig& config, std::string fingerprint) {
  const auto n = static_cast<std::size_t>(data.x.rows());
  const auto p = static_cast<std::size_t>(data.x.cols());
  if (n == 0) throw EmptyDataset("training set is empty");
  if (data.y.size() != n) throw ShapeError("label count does not match row count");
  if (data.feature_names.size() != p) throw ShapeError("feature name count does not match column count");
  if (p == 0) throw EmptyDataset("training set has no features");
  const auto positives = std::count(data.y.begin(), data.y.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == n) {
    throw SingleClassError("training labels contain a single class");
  }
  if (n < 2) throw EmptyDataset("training needs at least 2 samples");
  validate_config(config, p);
  const int mtry = config.features_per_split.value_or(
      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))));

  Forest forest;
  forest.feature_names = data.feature_names;
  forest.training_fingerprint = std::move(fingerprint);
  forest.trees.reserve(static_cast<std::size_t>(config.n_trees));
  for (int t = 0; t < config.n_trees; ++t) {
    const auto seed = derive_seed(config.rng_seed, static_cast<std::uint64_t>(t));
    std::vector<int> rows(n);
    std::mt19937_64 boot(derive_seed(seed, 0));
    if (config.bootstrap) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
      for (auto& r : rows) r = pick(boot);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(data, config, mtry, derive_seed(seed, 1));
    forest.trees.push_back(builder.build(std::move(rows)));
  }
  return forest;
}

std::vector<double> predict_proba(const Forest& forest, const RowMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != forest.n_features()) {
    throw ShapeError("expected " + std::to_string(forest.n_features()) + " features, got " +
                     std::to_string(x.cols()));
  }
  std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* row = x.row(i).data();
    double sum = 0.0;
    for (const auto& t : forest.trees) sum += t.predict(row);
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(forest.trees.size());
  }
  return out;
}

std::string training_fingerprint(const nlohmann::json& inputs, const ForestConfig& config) {
  const nlohmann::json doc = {{"inputs", inputs}, {"forest_config", to_json(config)}};
  return sha256_hex(doc.dump());
}

std::string model_digest(const Forest& forest) {
  std::string buf;
  for (const auto& name : forest.feature_names) buf += name + '\n';
  for (const auto& t : forest.trees) {
    buf += "tree\n";
    for (const auto& n : t.nodes) {
      buf += std::to_string(n.feature) + ';' + std::to_string(n.left) + ';' + std::to_string(n.right) + ';';
      put_double(buf, n.threshold);
      put_double(buf, n.value);
      put_double(buf, n.cover);
      buf += '\n';
    }
  }
  return sha256_hex(buf);
}

nlohmann::json to_json(const Tree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"value", n.value},
                     {"cover", n.cover}});
  }
  return {{"nodes", std::move(nodes)}};
}

nlohmann::json to_json(const Forest& forest) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : forest.trees) trees.push_back(to_json(t));
  return {{"feature_names", forest.feature_names},
          {"training_fingerprint", forest.training_fingerprint},
          {"trees", std::move(trees)}};
}

}  // namespace sequela::model
