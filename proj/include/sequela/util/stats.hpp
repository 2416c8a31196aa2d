#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sequela::stats {

double mean(std::span<const double> xs);

/// Variance with `ddof` delta degrees of freedom (0 = population).
double variance(std::span<const double> xs, int ddof = 0);

/// Linear-interpolation quantile (R type 7). `q` in [0, 1]; xs non-empty.
double quantile(std::vector<double> xs, double q);

double median(std::vector<double> xs);

/// Exact Mann-Whitney AUC. `twice_u` is 2U computed from midranks, so ties
/// count one half and the statistic stays an integer.
struct AucResult {
  std::uint64_t twice_u = 0;
  std::uint64_t pairs = 0;  // n_pos * n_neg
  double auc = 0.0;
};

/// Rank-statistic AUC of `scores` against 0/1 `labels`. nullopt when either
/// class is absent.
std::optional<AucResult> rank_auc(std::span<const double> scores, std::span<const int> labels);

/// 2U / (2 * pairs), correctly rounded. The exact value is the integer pair.
double auc_from_counts(std::uint64_t twice_u, std::uint64_t pairs);

inline double logistic(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace sequela::stats
