#include "sequela/projection/projection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "sequela/error.hpp"
#include "sequela/util/json.hpp"

namespace sequela::projection {

namespace {

void require_rows(const FeatureMatrix& m) {
  if (m.values.rows() < 2) throw DegenerateInput("projection needs at least 2 patients");
}

Layout base_layout(const FeatureMatrix& m, Method method) {
  Layout l;
  l.method = method;
  l.row_ids = m.row_ids;
  l.coords = RowMatrix::Zero(m.values.rows(), 2);
  return l;
}

// Largest-magnitude entry of each column made positive.
void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0) v.col(c) *= -1.0;
  }
}

// Eigenpairs of a symmetric matrix, largest eigenvalue first.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sorted_eigen(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  return {values, vectors};
}

Eigen::MatrixXd pairwise_distances(const RowMatrix& z) {
  const Eigen::Index n = z.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (z.row(i) - z.row(j)).norm();
    }
  }
  return d;
}

double normalized_stress(const RowMatrix& x, const Eigen::MatrixXd& delta, double delta_ss) {
  if (delta_ss == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      const double r = (x.row(i) - x.row(j)).norm() - delta(i, j);
      s += r * r;
    }
  }
  return s / delta_ss;
}

// Torgerson scaling: top two eigenvectors of the double-centred squared
// distance matrix, scaled by sqrt(eigenvalue).
RowMatrix classical_scaling(const Eigen::MatrixXd& delta) {
  const Eigen::Index n = delta.rows();
  const Eigen::MatrixXd d2 = delta.array().square();
  const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd b = -0.5 * j * d2 * j;
  auto [values, vectors] = sorted_eigen(b);
  Eigen::MatrixXd top = vectors.leftCols(std::min<Eigen::Index>(2, n));
  fix_signs(top);
  RowMatrix x = RowMatrix::Zero(n, 2);
  for (Eigen::Index c = 0; c < top.cols(); ++c) {
    x.col(c) = top.col(c) * std::sqrt(std::max(0.0, values(c)));
  }
  return x;
}

// Guttman transform with unit weights: X <- B(X) X / n.
RowMatrix guttman_transform(const RowMatrix& x, const Eigen::MatrixXd& delta) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (x.row(i) - x.row(j)).norm();
      const double v = d > 0.0 ? -delta(i, j) / d : 0.0;
      b(i, j) = b(j, i) = v;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) b(i, i) = -b.row(i).sum();
  return (b * x) / static_cast<double>(n);
}

// Conditional affinities p_{j|i} for one row, bisecting on the Gaussian
// precision until the row entropy matches log(perplexity).
void row_affinities(const Eigen::MatrixXd& d2, Eigen::Index i, double log_perp, Eigen::MatrixXd& p) {
  const Eigen::Index n = d2.rows();
  double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    double sum = 0.0, weighted = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = std::exp(-beta * d2(i, j));
      p(i, j) = w;
      sum += w;
      weighted += w * d2(i, j);
    }
    if (sum <= 0.0) {
      // Every neighbour underflowed: back off.
      hi = beta;
      beta = 0.5 * (lo + hi);
      continue;
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) /= sum;
    p(i, i) = 0.0;
    const double diff = entropy - log_perp;
    if (std::abs(diff) < 1e-5) break;
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (lo + hi);
    } else {
      hi = beta;
      beta = 0.5 * (lo + hi);
    }
  }
}

double kl_divergence(const Eigen::MatrixXd& p, const RowMatrix& y) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd num(n, n);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    num(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      num(i, j) = num(j, i) = v;
      z += 2.0 * v;
    }
  }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = std::max(num(i, j) / z, 1e-300);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::pca: return "pca";
    case Method::mds: return "mds";
    case Method::tsne: return "tsne";
  }
  return "pca";
}

std::optional<Method> parse_method(std::string_view s) {
  if (s == "pca") return Method::pca;
  if (s == "mds") return Method::mds;
  if (s == "tsne") return Method::tsne;
  return std::nullopt;
}

RowMatrix standardize_columns(const RowMatrix& x) {
  RowMatrix z(x.rows(), x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).sum() / n;
    const Eigen::VectorXd centred = x.col(j).array() - mean;
    const double sd = std::sqrt(centred.squaredNorm() / n);
    if (sd > 1e-12 * (1.0 + std::abs(mean))) {
      z.col(j) = centred / sd;
    } else {
      z.col(j).setZero();
    }
  }
  return z;
}

Layout run_pca(const FeatureMatrix& m) {
  require_rows(m);
  Layout layout = base_layout(m, Method::pca);
  const RowMatrix z = standardize_columns(m.values);
  const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(z.rows());
  auto [values, vectors] = sorted_eigen(cov);

  PcaDiagnostics diag;
  values = values.cwiseMax(0.0);
  const double total = values.sum();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    diag.explained_variance_ratio.push_back(total > 0.0 ? values(k) / total : 0.0);
  }
  const Eigen::Index k = std::min<Eigen::Index>(2, vectors.cols());
  diag.components = vectors.leftCols(k);
  fix_signs(diag.components);
  layout.coords.leftCols(k) = z * diag.components;
  layout.pca = std::move(diag);
  return layout;
}

Layout run_mds(const FeatureMatrix& m, const ProjectionConfig& config) {
  require_rows(m);
  if (config.mds_max_iters <= 0) throw DegenerateInput("mds_max_iters must be > 0");
  Layout layout = base_layout(m, Method::mds);
  const Eigen::MatrixXd delta = pairwise_distances(standardize_columns(m.values));
  const double delta_ss = delta.squaredNorm() / 2.0;

  RowMatrix x;
  if (config.mds_init == MdsInit::classical) {
    x = classical_scaling(delta);
  } else {
    std::mt19937_64 rng(config.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    x.resize(delta.rows(), 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  }

  MdsDiagnostics diag;
  double stress = normalized_stress(x, delta, delta_ss);
  diag.stress_history.push_back(stress);
  for (int it = 0; it < config.mds_max_iters && stress > 0.0; ++it) {
    RowMatrix next = guttman_transform(x, delta);
    const double next_stress = normalized_stress(next, delta, delta_ss);
    if (next_stress > stress) break;  // majorization floor reached in floating point
    x = std::move(next);
    const double previous = stress;
    stress = next_stress;
    diag.stress_history.push_back(stress);
    ++diag.iterations;
    if (previous - stress <= config.mds_tol * previous) break;
  }
  diag.final_stress = stress;
  layout.coords = x;
  layout.mds = std::move(diag);
  return layout;
}

double clamp_perplexity(double requested, std::size_t n) {
  const double bound = (static_cast<double>(n) - 1.0) / 3.0;
  if (requested < bound) return requested;
  return bound > 1.0 ? std::max(1.0, bound * (1.0 - 1e-9)) : bound * (1.0 - 1e-9);
}

Layout run_tsne(const FeatureMatrix& m, const ProjectionConfig& config) {
  require_rows(m);
  if (config.tsne_iters <= 0) throw DegenerateInput("tsne_iters must be > 0");
  if (!(config.tsne_perplexity > 0.0)) throw DegenerateInput("tsne_perplexity must be > 0");
  Layout layout = base_layout(m, Method::tsne);
  const Eigen::Index n = m.values.rows();
  const RowMatrix z = standardize_columns(m.values);

  TsneDiagnostics diag;
  diag.perplexity = clamp_perplexity(config.tsne_perplexity, static_cast<std::size_t>(n));
  diag.learning_rate = static_cast<double>(n) / 12.0;
  diag.exaggeration_iters = std::min(100, config.tsne_iters);

  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) d2(i, j) = d2(j, i) = (z.row(i) - z.row(j)).squaredNorm();
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const double log_perp = std::log(diag.perplexity);
  for (Eigen::Index i = 0; i < n; ++i) row_affinities(d2, i, log_perp, p);
  p = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  std::mt19937_64 rng(config.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  RowMatrix y(n, 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = gauss(rng);

  diag.initial_kl = kl_divergence(p, y);

  RowMatrix update = RowMatrix::Zero(n, 2);
  RowMatrix gains = RowMatrix::Ones(n, 2);
  RowMatrix grad(n, 2);
  Eigen::MatrixXd num(n, n);
  for (int it = 0; it < config.tsne_iters; ++it) {
    const double exaggeration = it < diag.exaggeration_iters ? diag.early_exaggeration : 1.0;
    const double momentum = it < 250 ? 0.5 : 0.8;

    double zsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        num(i, j) = num(j, i) = v;
        zsum += 2.0 * v;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double mult = (exaggeration * p(i, j) - num(i, j) / zsum) * num(i, j);
        gx += mult * (y(i, 0) - y(j, 0));
        gy += mult * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      double& g = gains.data()[k];
      const bool same_sign = (grad.data()[k] > 0) == (update.data()[k] > 0);
      g = same_sign ? std::max(g * 0.8, 0.01) : g + 0.2;
      update.data()[k] = momentum * update.data()[k] - diag.learning_rate * g * grad.data()[k];
      y.data()[k] += update.data()[k];
    }
    y.rowwise() -= y.colwise().mean();
    ++diag.iterations;
  }

  diag.final_kl = kl_divergence(p, y);
  layout.coords = y;
  layout.tsne = diag;
  return layout;
}

Layout run_projection(const FeatureMatrix& m, const ProjectionConfig& config) {
  switch (config.method) {
    case Method::pca: return run_pca(m);
    case Method::mds: return run_mds(m, config);
    case Method::tsne: return run_tsne(m, config);
  }
  throw DegenerateInput("unknown projection method");
}

ProjectionConfig projection_config_from_json(const nlohmann::json& j) {
  ProjectionConfig c;
  if (!j.is_object()) throw DegenerateInput("projection config must be an object");
  if (j.contains("method")) {
    auto m = j.at("method").is_string() ? parse_method(j.at("method").get<std::string>()) : std::nullopt;
    if (!m) throw DegenerateInput("method must be one of pca, mds, tsne");
    c.method = *m;
  }
  try {
    c.rng_seed = j.value("seed", c.rng_seed);
    c.tsne_perplexity = j.value("perplexity", c.tsne_perplexity);
    c.tsne_iters = j.value("tsne_iters", c.tsne_iters);
    c.mds_max_iters = j.value("mds_max_iters", c.mds_max_iters);
    c.mds_tol = j.value("mds_tol", c.mds_tol);
    if (j.contains("mds_init")) {
      const auto init = j.at("mds_init").get<std::string>();
      if (init != "classical" && init != "random") throw DegenerateInput("mds_init must be classical or random");
      c.mds_init = init == "random" ? MdsInit::random : MdsInit::classical;
    }
  } catch (const nlohmann::json::exception& e) {
    throw DegenerateInput(std::string("bad projection config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const Layout& l) {
  nlohmann::json points = nlohmann::json::array();
  for (Eigen::Index i = 0; i < l.coords.rows(); ++i) {
    points.push_back({{"patient_id", l.row_ids[static_cast<std::size_t>(i)]}, {"x", l.coords(i, 0)}, {"y", l.coords(i, 1)}});
  }
  nlohmann::json diag = nlohmann::json::object();
  if (l.pca) {
    diag["explained_variance_ratio"] = l.pca->explained_variance_ratio;
  }
  if (l.mds) {
    diag["final_stress"] = l.mds->final_stress;
    diag["iterations"] = l.mds->iterations;
    diag["stress_history"] = l.mds->stress_history;
  }
  if (l.tsne) {
    diag["initial_kl"] = l.tsne->initial_kl;
    diag["final_kl"] = l.tsne->final_kl;
    diag["perplexity"] = l.tsne->perplexity;
    diag["learning_rate"] = l.tsne->learning_rate;
    diag["early_exaggeration"] = l.tsne->early_exaggeration;
    diag["exaggeration_iters"] = l.tsne->exaggeration_iters;
    diag["iterations"] = l.tsne->iterations;
  }
  return {{"method", to_string(l.method)}, {"points", std::move(points)}, {"diagnostics", std::move(diag)}};
}

}  // namespace sequela::projection
