#include "sequela/util/stats.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sequela::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs, int ddof) {
  const auto n = static_cast<double>(xs.size());
  if (n - ddof <= 0) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / (n - ddof);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double auc_from_counts(std::uint64_t twice_u, std::uint64_t pairs) {
  return static_cast<double>(twice_u) / static_cast<double>(2 * pairs);
}

std::optional<AucResult> rank_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of doubled midranks over positives; ranks are 1-based.
  std::uint64_t twice_rank_sum = 0;
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t twice_midrank = (i + 1) + j;  // 2 * (first + last) / 2
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        twice_rank_sum += twice_midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  AucResult r;
  r.twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  r.pairs = n_pos * n_neg;
  r.auc = auc_from_counts(r.twice_u, r.pairs);
  return r;
}

}  // namespace sequela::stats
