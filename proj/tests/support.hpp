#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/model/forest.hpp"

namespace sequela::test {

/// Seeded generator for property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(eng_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Random tree over features [0, p) with consistent covers: children covers
/// sum to the parent's, internal values are the cover-weighted child mean.
model::Tree random_tree(Rng& rng, int p, int max_depth, const std::vector<int>& allowed_features = {});

/// Forest of random trees with feature names f0..f{p-1}.
model::Forest random_forest(Rng& rng, int p, int max_depth, int n_trees);

/// Random n x p matrix with entries in [-2, 2].
RowMatrix random_matrix(Rng& rng, int n, int p);

/// A corpus-JSON document with a single patient carrying all five event
/// groups. Edit the returned JSON to build malformed inputs.
nlohmann::json one_patient_corpus_json();

/// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& name);

}  // namespace sequela::test
