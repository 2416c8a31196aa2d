#pragma once

#include <vector>

#include "sequela/util/matrix.hpp"

namespace sequela::sampling {

struct LogisticOptions {
  double learning_rate = 0.1;
  int max_iters = 5000;
  double tol = 1e-8;  // on the gradient norm of the mean log-likelihood
};

struct LogisticModel {
  std::vector<double> weights;
  double intercept = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  double log_likelihood = 0.0;  // mean per row

  double linear_predictor(const double* row) const;
};

/// Batch gradient ascent on the mean log-likelihood. The first step tries
/// learning_rate, later steps the Barzilai-Borwein length, and every step
/// backtracks until the Armijo condition holds. Throws ConvergenceError
/// when the gradient norm is still above tol after max_iters.
LogisticModel fit_logistic(const RowMatrix& x, const std::vector<int>& y, const LogisticOptions& options = {});

}  // namespace sequela::sampling
