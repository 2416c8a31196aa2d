#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/projection/features.hpp"

namespace sequela::projection {

enum class Method { pca, mds, tsne };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

enum class MdsInit { classical, random };

struct ProjectionConfig {
  Method method = Method::pca;
  std::uint64_t rng_seed = 0;
  double tsne_perplexity = 30.0;
  int tsne_iters = 500;
  int mds_max_iters = 300;
  double mds_tol = 1e-6;
  MdsInit mds_init = MdsInit::classical;
};

struct PcaDiagnostics {
  /// Every component's share of total variance, non-increasing.
  std::vector<double> explained_variance_ratio;
  /// Unit-length principal axes (p x min(p, 2)), columns ordered by variance.
  /// Sign convention: each column's largest-magnitude entry is positive.
  Eigen::MatrixXd components;
};

struct MdsDiagnostics {
  /// Normalized stress sum((d_ij - delta_ij)^2) / sum(delta_ij^2) before the
  /// first update and after each SMACOF update.
  std::vector<double> stress_history;
  double final_stress = 0.0;
  int iterations = 0;
};

struct TsneDiagnostics {
  double initial_kl = 0.0;
  double final_kl = 0.0;
  double perplexity = 0.0;  // after clamping
  double learning_rate = 0.0;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 100;
  int iterations = 0;
};

struct Layout {
  Method method = Method::pca;
  std::vector<std::string> row_ids;
  RowMatrix coords;  // n x 2
  std::optional<PcaDiagnostics> pca;
  std::optional<MdsDiagnostics> mds;
  std::optional<TsneDiagnostics> tsne;
};

/// Column z-scores (population sd). Zero-variance columns become all-zero.
RowMatrix standardize_columns(const RowMatrix& x);

Layout run_pca(const FeatureMatrix& m);
Layout run_mds(const FeatureMatrix& m, const ProjectionConfig& config);
Layout run_tsne(const FeatureMatrix& m, const ProjectionConfig& config);

/// Dispatches on config.method. Throws DegenerateInput when n < 2.
Layout run_projection(const FeatureMatrix& m, const ProjectionConfig& config);

/// Perplexity actually used for n points: strictly below (n - 1) / 3, and
/// at least 1 where that bound allows.
double clamp_perplexity(double requested, std::size_t n);

ProjectionConfig projection_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Layout& layout);

}  // namespace sequela::projection
