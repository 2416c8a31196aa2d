#include "sequela/model/shap.hpp"

#include <algorithm>
#include <cmath>

#include "sequela/error.hpp"

namespace sequela::model {

namespace {

constexpr std::size_t kMaxBruteForceFeatures = 12;

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction, int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) / static_cast<double>(depth + 1);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next_one_portion * (depth + 1) / ((i + 1) * one);
      next_one_portion = tmp - path[i].weight * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = next_one_portion * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next_one_portion = path[i].weight - tmp * zero * (depth - i) / static_cast<double>(depth + 1);
    } else if (zero != 0.0) {
      total += path[i].weight / zero / ((depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

struct Recursion {
  const Tree& tree;
  const double* row;
  double* phi;

  void run(int node, int depth, PathElement* parent_path, double zero_fraction, double one_fraction,
           int feature) {
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    extend_path(path, depth, zero_fraction, one_fraction, feature);

    const Node& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        phi[path[i].feature] += w * (path[i].one_fraction - path[i].zero_fraction) * n.value;
      }
      return;
    }

    const int hot = row[n.feature] <= n.threshold ? n.left : n.right;
    const int cold = hot == n.left ? n.right : n.left;
    const double hot_zero = tree.nodes[static_cast<std::size_t>(hot)].cover / n.cover;
    const double cold_zero = tree.nodes[static_cast<std::size_t>(cold)].cover / n.cover;
    double incoming_zero = 1.0, incoming_one = 1.0;

    int index = 0;
    while (index <= depth && path[index].feature != n.feature) ++index;
    if (index <= depth) {
      incoming_zero = path[index].zero_fraction;
      incoming_one = path[index].one_fraction;
      unwind_path(path, depth, index);
      --depth;
    }
    run(hot, depth + 1, path, hot_zero * incoming_zero, incoming_one, n.feature);
    run(cold, depth + 1, path, cold_zero * incoming_zero, 0.0, n.feature);
  }
};

void check_width(const Forest& forest, Eigen::Index cols, const char* what) {
  if (static_cast<std::size_t>(cols) != forest.n_features()) {
    throw ShapeError(std::string(what) + " has " + std::to_string(cols) + " columns, forest expects " +
                     std::to_string(forest.n_features()));
  }
}

}  // namespace

std::vector<double> tree_shap(const Tree& tree, const double* row, std::size_t p) {
  std::vector<double> phi(p, 0.0);
  const auto d = static_cast<std::size_t>(tree.depth()) + 2;
  std::vector<PathElement> buffer(d * (d + 1) / 2 + d);
  Recursion{tree, row, phi.data()}.run(0, 0, buffer.data(), 1.0, 1.0, -1);
  return phi;
}

ShapMatrix shap_values(const Forest& forest, const RowMatrix& instances, const RowMatrix& background) {
  check_width(forest, instances.cols(), "instances");
  check_width(forest, background.cols(), "background");
  if (background.rows() == 0) throw ShapeError("background set is empty");

  const std::size_t p = forest.n_features();
  ShapMatrix out;
  out.feature_names = forest.feature_names;
  out.values = RowMatrix::Zero(instances.rows(), static_cast<Eigen::Index>(p));
  const double n_trees = static_cast<double>(forest.trees.size());
  for (const auto& t : forest.trees) out.base_value += t.expected_value();
  out.base_value /= n_trees;

  std::size_t max_depth = 0;
  for (const auto& t : forest.trees) max_depth = std::max(max_depth, static_cast<std::size_t>(t.depth()));
  const std::size_t d = max_depth + 2;
  std::vector<PathElement> buffer(d * (d + 1) / 2 + d);
  std::vector<double> phi(p);
  for (Eigen::Index i = 0; i < instances.rows(); ++i) {
    std::fill(phi.begin(), phi.end(), 0.0);
    for (const auto& t : forest.trees) {
      Recursion{t, instances.row(i).data(), phi.data()}.run(0, 0, buffer.data(), 1.0, 1.0, -1);
    }
    for (std::size_t j = 0; j < p; ++j) out.values(i, static_cast<Eigen::Index>(j)) = phi[j] / n_trees;
  }

  const auto bg = predict_proba(forest, background);
  double sum = 0.0;
  for (double v : bg) sum += v;
  out.background_mean_prediction = sum / static_cast<double>(bg.size());
  return out;
}

double coalition_value(const Tree& tree, const double* row, unsigned known) {
  struct Walk {
    const Tree& tree;
    const double* row;
    unsigned known;
    double operator()(int i) const {
      const Node& n = tree.nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) return n.value;
      if (known & (1u << n.feature)) return (*this)(row[n.feature] <= n.threshold ? n.left : n.right);
      const Node& l = tree.nodes[static_cast<std::size_t>(n.left)];
      const Node& r = tree.nodes[static_cast<std::size_t>(n.right)];
      return (l.cover * (*this)(n.left) + r.cover * (*this)(n.right)) / n.cover;
    }
  };
  return Walk{tree, row, known}(0);
}

std::vector<double> shap_brute_force(const Tree& tree, const double* row, std::size_t p) {
  if (p > kMaxBruteForceFeatures) {
    throw TooManyFeatures("brute-force Shapley values need p <= 12, got " + std::to_string(p));
  }
  const unsigned subsets = 1u << p;
  std::vector<double> v(subsets);
  for (unsigned s = 0; s < subsets; ++s) v[s] = coalition_value(tree, row, s);

  // weight[k] = k! (p - k - 1)! / p!
  std::vector<double> weight(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    weight[k] = std::exp(std::lgamma(k + 1.0) + std::lgamma(static_cast<double>(p - k)) -
                         std::lgamma(static_cast<double>(p) + 1.0));
  }
  std::vector<double> phi(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const unsigned bit = 1u << j;
    for (unsigned s = 0; s < subsets; ++s) {
      if (s & bit) continue;
      phi[j] += weight[static_cast<std::size_t>(__builtin_popcount(s))] * (v[s | bit] - v[s]);
    }
  }
  return phi;
}

std::vector<double> shap_brute_force(const Forest& forest, const double* row) {
  const std::size_t p = forest.n_features();
  std::vector<double> phi(p, 0.0);
  for (const auto& t : forest.trees) {
    const auto tp = shap_brute_force(t, row, p);
    for (std::size_t j = 0; j < p; ++j) phi[j] += tp[j];
  }
  for (auto& v : phi) v /= static_cast<double>(forest.trees.size());
  return phi;
}

std::vector<double> mean_abs_shap(const ShapMatrix& shap) {
  std::vector<double> out(static_cast<std::size_t>(shap.values.cols()), 0.0);
  if (shap.values.rows() == 0) return out;
  for (Eigen::Index j = 0; j < shap.values.cols(); ++j) {
    out[static_cast<std::size_t>(j)] = shap.values.col(j).cwiseAbs().sum() / static_cast<double>(shap.values.rows());
  }
  return out;
}

nlohmann::json to_json(const ShapMatrix& shap, const std::vector<std::string>& row_ids) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < shap.values.rows(); ++i) {
    std::vector<double> phi(shap.values.row(i).begin(), shap.values.row(i).end());
    rows.push_back({{"patient_id", row_ids.at(static_cast<std::size_t>(i))}, {"phi", std::move(phi)}});
  }
  return {{"variant", shap.variant},
          {"feature_names", shap.feature_names},
          {"base_value", shap.base_value},
          {"background_mean_prediction", shap.background_mean_prediction},
          {"rows", std::move(rows)}};
}

}  // namespace sequela::model
