#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>

namespace sequela::test {

namespace {

int grow(Rng& rng, model::Tree& tree, int p, int depth, int max_depth, double cover,
         const std::vector<int>& allowed) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[index].cover = cover;
  const bool leaf = depth >= max_depth || cover < 2 || (depth > 0 && rng.coin(0.25));
  if (leaf) {
    tree.nodes[index].value = rng.uniform();
    return index;
  }
  const int feature = allowed.empty() ? rng.integer(0, p - 1) : allowed[rng.integer(0, static_cast<int>(allowed.size()) - 1)];
  const double threshold = rng.uniform(-1.5, 1.5);
  const double left_cover = std::floor(cover * rng.uniform(0.1, 0.9));
  const double lc = std::max(1.0, std::min(cover - 1, left_cover));
  const int left = grow(rng, tree, p, depth + 1, max_depth, lc, allowed);
  const int right = grow(rng, tree, p, depth + 1, max_depth, cover - lc, allowed);
  auto& node = tree.nodes[index];
  node.feature = feature;
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  node.value = (tree.nodes[left].value * lc + tree.nodes[right].value * (cover - lc)) / cover;
  return index;
}

}  // namespace

model::Tree random_tree(Rng& rng, int p, int max_depth, const std::vector<int>& allowed_features) {
  model::Tree tree;
  grow(rng, tree, p, 0, max_depth, rng.integer(20, 200), allowed_features);
  return tree;
}

model::Forest random_forest(Rng& rng, int p, int max_depth, int n_trees) {
  model::Forest forest;
  for (int j = 0; j < p; ++j) forest.feature_names.push_back("f" + std::to_string(j));
  for (int t = 0; t < n_trees; ++t) forest.trees.push_back(random_tree(rng, p, max_depth));
  return forest;
}

RowMatrix random_matrix(Rng& rng, int n, int p) {
  RowMatrix m(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
  }
  return m;
}

nlohmann::json one_patient_corpus_json() {
  using nlohmann::json;
  json admission = {
      {"admit", "2021-03-01T08:00:00Z"},
      {"discharge", "2021-03-06T08:00:00Z"},
      {"diagnoses", json::array({{{"code", "M32.1"}, {"text", "Systemic lupus erythematosus"}, {"primary", true}},
                                 {{"code", "I10"}, {"text", "Essential hypertension"}, {"primary", false}}})},
      {"labs", json::array({{{"name", "CRP"},
                             {"value", 14.5},
                             {"unit", "mg/L"},
                             {"ref_low", 0.0},
                             {"ref_high", 10.0},
                             {"time", "2021-03-02T09:00:00Z"}}})},
      {"exams", json::array({{{"name", "MRI hip"},
                              {"flag", "abnormal"},
                              {"report", "MRI hip: bone marrow edema"},
                              {"time", "2021-03-03T10:00:00Z"}}})},
      {"orders", json::array({{{"drug", "methylprednisolone"},
                               {"dose", 40.0},
                               {"route", "iv"},
                               {"time", "2021-03-02T12:00:00Z"}}})},
      {"notes", json::array({{{"time", "2021-03-02T18:00:00Z"}, {"text", "Started pulse steroids."}}})}};
  return {{"schema_version", "1.0"},
          {"drug_dictionary",
           {{"methylprednisolone", {{"class", "medium_acting"}, {"prednisone_factor", 1.25}}},
            {"dexamethasone", {{"class", "long_acting"}, {"prednisone_factor", 6.67}}},
            {"hydrocortisone", {{"class", "short_acting"}, {"prednisone_factor", 0.25}}},
            {"omeprazole", {{"class", "non_hormone"}, {"prednisone_factor", 0.0}}}}},
          {"patients",
           json::array({{{"id", "A001"},
                         {"age", 41},
                         {"gender", "female"},
                         {"outcome", {{"has_sequela", true}, {"onset_time", "2021-03-05T00:00:00Z"}}},
                         {"admissions", json::array({admission})}}})}};
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sequela-test-" + std::to_string(::getpid())) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sequela::test
