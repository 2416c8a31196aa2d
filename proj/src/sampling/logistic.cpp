#include "sequela/sampling/logistic.hpp"

#include <cmath>

#include "sequela/error.hpp"

namespace sequela::sampling {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// theta = [weights..., intercept]
double log_likelihood(const RowMatrix& x, const std::vector<int>& y, const Eigen::VectorXd& theta) {
  const Eigen::Index q = x.cols();
  const Eigen::VectorXd z = (x * theta.head(q)).array() + theta(q);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) ll += y[static_cast<std::size_t>(i)] * z(i) - softplus(z(i));
  return ll / static_cast<double>(x.rows());
}

Eigen::VectorXd gradient(const RowMatrix& x, const std::vector<int>& y, const Eigen::VectorXd& theta) {
  const Eigen::Index q = x.cols();
  const Eigen::VectorXd z = (x * theta.head(q)).array() + theta(q);
  Eigen::VectorXd r(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) r(i) = y[static_cast<std::size_t>(i)] - sigmoid(z(i));
  Eigen::VectorXd g(q + 1);
  g.head(q) = x.transpose() * r;
  g(q) = r.sum();
  return g / static_cast<double>(x.rows());
}

}  // namespace

double LogisticModel::linear_predictor(const double* row) const {
  double z = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * row[j];
  return z;
}

LogisticModel fit_logistic(const RowMatrix& x, const std::vector<int>& y, const LogisticOptions& options) {
  if (x.rows() == 0) throw EmptyDataset("logistic fit on zero rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("label count does not match row count");

  const Eigen::Index q = x.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(q + 1);
  double ll = log_likelihood(x, y, theta);
  Eigen::VectorXd g = gradient(x, y, theta);
  Eigen::VectorXd prev_theta, prev_g;
  LogisticModel model;
  int it = 0;
  for (; it < options.max_iters && g.norm() > options.tol; ++it) {
    double step = options.learning_rate;
    if (it > 0) {
      const Eigen::VectorXd s = theta - prev_theta;
      const double curvature = -s.dot(g - prev_g);
      if (curvature > 0) step = s.squaredNorm() / curvature;
    }
    const double g2 = g.squaredNorm();
    Eigen::VectorXd next = theta + step * g;
    double next_ll = log_likelihood(x, y, next);
    for (int halvings = 0; next_ll < ll + 1e-4 * step * g2 && halvings < 60; ++halvings) {
      step *= 0.5;
      next = theta + step * g;
      next_ll = log_likelihood(x, y, next);
    }
    if (next_ll < ll) break;  // no ascent direction left at machine precision
    prev_theta = theta;
    prev_g = g;
    theta = next;
    ll = next_ll;
    g = gradient(x, y, theta);
  }
  model.iterations = it;
  model.gradient_norm = g.norm();
  model.log_likelihood = ll;
  model.weights.assign(theta.data(), theta.data() + q);
  model.intercept = theta(q);
  if (!(model.gradient_norm <= options.tol)) {
    throw ConvergenceError("logistic fit did not converge: gradient norm " + std::to_string(model.gradient_norm) +
                           " after " + std::to_string(it) + " iterations");
  }
  return model;
}

}  // namespace sequela::sampling
