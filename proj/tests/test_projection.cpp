#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "sequela/ehr/corpus_json.hpp"
#include "sequela/error.hpp"
#include "sequela/projection/features.hpp"
#include "sequela/projection/glyph.hpp"
#include "sequela/projection/projection.hpp"
#include "sequela/synth/generator.hpp"
#include "support.hpp"

using namespace sequela;
using projection::FeatureMatrix;
using projection::Method;

namespace {

FeatureMatrix matrix_of(const RowMatrix& x) {
  FeatureMatrix m;
  m.values = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) m.row_ids.push_back("r" + std::to_string(1000 + i));
  for (Eigen::Index j = 0; j < x.cols(); ++j) m.columns.push_back("c" + std::to_string(j));
  m.imputed_with.assign(static_cast<std::size_t>(x.cols()), 0.0);
  return m;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

Eigen::MatrixXd distances(const RowMatrix& y) {
  Eigen::MatrixXd d(y.rows(), y.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) d(i, j) = (y.row(i) - y.row(j)).norm();
  }
  return d;
}

RowMatrix blobs(test::Rng& rng, int per_blob, int p, double gap) {
  RowMatrix x(2 * per_blob, p);
  for (int i = 0; i < 2 * per_blob; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal() + (i < per_blob ? 0.0 : gap);
  }
  return x;
}

ehr::PatientRecord record_with_doses(std::vector<std::pair<ehr::HormoneClass, double>> doses,
                                     std::vector<std::pair<int, int>> admissions = {{0, 5}}) {
  ehr::PatientRecord r;
  r.patient_id = "G1";
  for (auto [start, end] : admissions) {
    ehr::AdmissionEpisode a;
    a.admit_time = start * ehr::kSecondsPerDay;
    a.discharge_time = end * ehr::kSecondsPerDay;
    r.admissions.push_back(a);
  }
  for (auto [cls, dose] : doses) {
    ehr::MedicationOrder o;
    o.hormone_class = cls;
    o.dose = dose;
    o.dose_mg = dose;
    o.order_time = r.admissions[0].admit_time + 3600;
    r.admissions[0].medication_orders.push_back(o);
  }
  return r;
}

}  // namespace

TEST(Vectorize, SchemaLayout) {
  const auto cols = projection::feature_schema({{"ALT", "CRP"}});
  EXPECT_EQ(cols.size(), 12u + 2 * 3 + 2);
  EXPECT_EQ(cols.front(), "age");
  EXPECT_EQ(cols[6], "dose_short_acting");
  EXPECT_EQ(cols[12], "lab_ALT_mean");
  EXPECT_EQ(cols.back(), "exam_missing");
}

TEST(Vectorize, NoHormoneOrdersGivesZeroExposure) {
  auto r = record_with_doses({});
  const auto v = projection::vectorize_patient(r, {{}});
  for (std::size_t j = 6; j < 12; ++j) EXPECT_EQ(v.values[j], 0.0);
}

TEST(Vectorize, StayDaysSumAcrossAdmissions) {
  const auto r = record_with_doses({}, {{0, 5}, {10, 17}});
  const auto v = projection::vectorize_patient(r, {{}});
  EXPECT_DOUBLE_EQ(v.values[4], 12.0);
  EXPECT_DOUBLE_EQ(v.values[5], 2.0);
}

TEST(Vectorize, DosesMatchEmittedOrders) {
  synth::RiskSpec spec;
  spec.rng_seed = 31;
  spec.n_patients = 150;
  const auto corpus = synth::generate_corpus(spec).corpus;
  const auto cfg = projection::schema_config_for(corpus);
  EXPECT_EQ(cfg.canonical_labs, synth::kCanonicalLabs);
  for (const auto& [id, r] : corpus.patients) {
    const auto v = projection::vectorize_patient(r, cfg);
    ASSERT_EQ(v.values.size(), projection::feature_schema(cfg).size());
    for (std::size_t k = 0; k < 3; ++k) {
      double dose = 0.0;
      int count = 0;
      for (const auto& a : r.admissions) {
        for (const auto& o : a.medication_orders) {
          if (o.hormone_class == ehr::kHormoneClasses[k]) {
            dose += o.dose;
            ++count;
          }
        }
      }
      EXPECT_NEAR(v.values[6 + k], dose, 1e-9);
      EXPECT_EQ(v.values[9 + k], count);
    }
  }
}

TEST(FeatureMatrix, MissingLabsAreImputedWithTheMedian) {
  synth::RiskSpec spec;
  spec.rng_seed = 32;
  spec.n_patients = 300;
  const auto corpus = synth::generate_corpus(spec).corpus;
  std::vector<std::string> ids;
  for (const auto& [id, r] : corpus.patients) ids.push_back(id);
  const auto cfg = projection::schema_config_for(corpus);
  const auto m = projection::build_feature_matrix(corpus, ids, cfg);
  EXPECT_TRUE(m.values.allFinite());
  const auto j = m.column_index("lab_CRP_mean");
  const auto miss = m.column_index("lab_CRP_missing");
  std::vector<double> observed;
  int missing = 0;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    if (m.values(i, static_cast<Eigen::Index>(miss)) == 1.0) ++missing;
    else observed.push_back(m.values(i, static_cast<Eigen::Index>(j)));
  }
  ASSERT_GT(missing, 0);
  std::sort(observed.begin(), observed.end());
  const std::size_t n = observed.size();
  const double median = n % 2 ? observed[n / 2] : (observed[n / 2 - 1] + observed[n / 2]) / 2.0;
  EXPECT_DOUBLE_EQ(m.imputed_with[j], median);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    if (m.values(i, static_cast<Eigen::Index>(miss)) == 1.0) {
      EXPECT_EQ(m.values(i, static_cast<Eigen::Index>(j)), median);
    }
  }
  EXPECT_THROW(m.column_index("nope"), UnknownFeature);
  const auto sub = m.select_columns({"dose_long_acting", "age"});
  EXPECT_EQ(sub.columns, (std::vector<std::string>{"dose_long_acting", "age"}));
  EXPECT_EQ(sub.values(3, 1), m.values(3, 0));
}

TEST(Pca, CollinearPointsHaveAllVarianceOnFirstAxis) {
  RowMatrix x(6, 2);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = i * 1.5 - 2.0;
    x(i, 1) = 4.0;
  }
  const auto l = projection::run_pca(matrix_of(x));
  ASSERT_EQ(l.pca->explained_variance_ratio.size(), 2u);
  EXPECT_NEAR(l.pca->explained_variance_ratio[0], 1.0, 1e-9);
  EXPECT_NEAR(l.pca->explained_variance_ratio[1], 0.0, 1e-9);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(l.coords(i, 1), 0.0, 1e-9);
}

TEST(Pca, ComponentsOrthonormalAndRatiosSorted) {
  test::Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = rng.integer(2, 9);
    RowMatrix x = test::random_matrix(rng, rng.integer(5, 60), p);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, p - 1) = 0.7 * x(i, 0) + 0.1 * x(i, p - 1);
    const auto l = projection::run_pca(matrix_of(x));
    const auto& c = l.pca->components;
    const Eigen::MatrixXd gram = c.transpose() * c;
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8);
    const auto& r = l.pca->explained_variance_ratio;
    double total = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      total += r[k];
      if (k > 0) {
        EXPECT_LE(r[k], r[k - 1]);
      }
    }
    EXPECT_LE(total, 1.0 + 1e-9);
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      Eigen::Index arg = 0;
      c.col(k).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(c(arg, k), 0.0);
    }
  }
}

TEST(Pca, EigenvaluesMatchJacobiOracle) {
  test::Rng rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = rng.integer(2, 5);
    const RowMatrix x = test::random_matrix(rng, rng.integer(6, 40), p);
    const auto l = projection::run_pca(matrix_of(x));
    const RowMatrix z = projection::standardize_columns(x);
    const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(z.rows());
    const auto ev = jacobi_eigenvalues(cov);
    double sum = 0.0;
    for (double e : ev) sum += e;
    ASSERT_EQ(l.pca->explained_variance_ratio.size(), ev.size());
    for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(l.pca->explained_variance_ratio[k], ev[k] / sum, 1e-6);
  }
}

TEST(Mds, TriangleIsEmbeddedExactly) {
  RowMatrix x(3, 3);
  x << 0, 0, 1, 3, 0, 2, 0, 4, -1;
  projection::ProjectionConfig cfg;
  cfg.method = Method::mds;
  const auto l = projection::run_projection(matrix_of(x), cfg);
  EXPECT_LT(l.mds->final_stress, 1e-8);
  cfg.mds_init = projection::MdsInit::random;
  cfg.mds_max_iters = 2000;
  cfg.mds_tol = 1e-14;
  EXPECT_LT(projection::run_projection(matrix_of(x), cfg).mds->final_stress, 1e-8);
}

TEST(Mds, StressNeverIncreases) {
  test::Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    projection::ProjectionConfig cfg;
    cfg.method = Method::mds;
    cfg.rng_seed = static_cast<std::uint64_t>(trial);
    cfg.mds_init = trial % 2 ? projection::MdsInit::random : projection::MdsInit::classical;
    const auto l = projection::run_projection(matrix_of(test::random_matrix(rng, rng.integer(5, 40), rng.integer(2, 6))), cfg);
    const auto& h = l.mds->stress_history;
    ASSERT_GE(h.size(), 1u);
    for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LE(h[k], h[k - 1]);
    EXPECT_EQ(l.mds->final_stress, h.back());
    EXPECT_LE(l.mds->iterations, cfg.mds_max_iters);
  }
}

TEST(Tsne, SeparatesBlobsAndLowersKl) {
  test::Rng rng(44);
  const RowMatrix x = blobs(rng, 100, 5, 8.0);
  projection::ProjectionConfig cfg;
  cfg.method = Method::tsne;
  cfg.rng_seed = 9;
  const auto l = projection::run_projection(matrix_of(x), cfg);
  EXPECT_LT(l.tsne->final_kl, l.tsne->initial_kl);
  EXPECT_TRUE(l.coords.allFinite());
  const auto d = distances(l.coords);
  double intra = 0.0, inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (int i = 0; i < 200; ++i) {
    for (int j = i + 1; j < 200; ++j) {
      if ((i < 100) == (j < 100)) {
        intra += d(i, j);
        ++n_intra;
      } else {
        inter += d(i, j);
        ++n_inter;
      }
    }
  }
  EXPECT_GT(inter / n_inter, intra / n_intra);
  EXPECT_DOUBLE_EQ(l.tsne->learning_rate, 200.0 / 12.0);
  EXPECT_EQ(l.tsne->early_exaggeration, 12.0);
}

TEST(Tsne, SameSeedIsBitIdentical) {
  test::Rng rng(45);
  const auto m = matrix_of(test::random_matrix(rng, 50, 4));
  projection::ProjectionConfig cfg;
  cfg.method = Method::tsne;
  cfg.rng_seed = 123;
  cfg.tsne_iters = 300;
  const auto a = projection::run_projection(m, cfg);
  const auto b = projection::run_projection(m, cfg);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_EQ(projection::to_json(a).dump(), projection::to_json(b).dump());
  cfg.rng_seed = 124;
  EXPECT_NE(projection::run_projection(m, cfg).coords, a.coords);
}

TEST(Projection, TranslationLeavesDistancesUnchanged) {
  test::Rng rng(46);
  for (auto method : {Method::pca, Method::mds, Method::tsne}) {
    const RowMatrix x = test::random_matrix(rng, 40, 4);
    RowMatrix shifted = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) shifted.col(j).array() += rng.uniform(-50, 50);
    projection::ProjectionConfig cfg;
    cfg.method = method;
    cfg.rng_seed = 5;
    cfg.tsne_perplexity = 10;
    const auto a = projection::run_projection(matrix_of(x), cfg);
    const auto b = projection::run_projection(matrix_of(shifted), cfg);
    EXPECT_LE((distances(a.coords) - distances(b.coords)).cwiseAbs().maxCoeff(), 1e-6) << projection::to_string(method);
  }
}

TEST(Projection, DegenerateInputs) {
  projection::ProjectionConfig cfg;
  RowMatrix one(1, 3);
  one << 1, 2, 3;
  for (auto method : {Method::pca, Method::mds, Method::tsne}) {
    cfg.method = method;
    EXPECT_THROW(projection::run_projection(matrix_of(one), cfg), DegenerateInput);
  }
  RowMatrix constant = RowMatrix::Constant(4, 3, 2.0);
  cfg.method = Method::pca;
  const auto l = projection::run_projection(matrix_of(constant), cfg);
  EXPECT_TRUE(l.coords.allFinite());
}

TEST(Projection, PerplexityClamp) {
  EXPECT_EQ(projection::clamp_perplexity(30.0, 1000), 30.0);
  EXPECT_LT(projection::clamp_perplexity(30.0, 40), 13.0);
  EXPECT_GE(projection::clamp_perplexity(30.0, 40), 1.0);
  EXPECT_LT(projection::clamp_perplexity(30.0, 3), 2.0 / 3.0);
}

TEST(Projection, ConfigFromJson) {
  const auto cfg = projection::projection_config_from_json(
      {{"method", "tsne"}, {"seed", 17}, {"perplexity", 12.5}, {"tsne_iters", 250}});
  EXPECT_EQ(cfg.method, Method::tsne);
  EXPECT_EQ(cfg.rng_seed, 17u);
  EXPECT_EQ(cfg.tsne_perplexity, 12.5);
  EXPECT_EQ(cfg.tsne_iters, 250);
  EXPECT_EQ(projection::parse_method("umap"), std::nullopt);
}

TEST(Glyph, SingleAdmissionShortActingOnly) {
  const auto g = projection::build_glyph(record_with_doses({{ehr::HormoneClass::short_acting, 30.0}}));
  ASSERT_EQ(g.left_arcs.size(), 1u);
  EXPECT_EQ(g.left_arcs[0].start_fraction, 0.0);
  EXPECT_EQ(g.left_arcs[0].end_fraction, 1.0);
  EXPECT_EQ(g.right_sectors[0].angle_degrees, 180.0);
  EXPECT_EQ(g.right_sectors[1].angle_degrees, 0.0);
  EXPECT_EQ(g.right_sectors[2].angle_degrees, 0.0);
  EXPECT_EQ(g.center_text, "5d");
  EXPECT_EQ(g.order_ticks.size(), 1u);
}

TEST(Glyph, SectorsAreProportionalToDose) {
  const auto g = projection::build_glyph(record_with_doses({{ehr::HormoneClass::short_acting, 10.0},
                                                            {ehr::HormoneClass::medium_acting, 10.0},
                                                            {ehr::HormoneClass::long_acting, 20.0}}));
  EXPECT_DOUBLE_EQ(g.right_sectors[0].angle_degrees, 45.0);
  EXPECT_DOUBLE_EQ(g.right_sectors[1].angle_degrees, 45.0);
  EXPECT_DOUBLE_EQ(g.right_sectors[2].angle_degrees, 90.0);
}

TEST(Glyph, NoHormoneDoseLeavesRightSideEmpty) {
  const auto g = projection::build_glyph(record_with_doses({{ehr::HormoneClass::non_hormone, 500.0}}));
  for (const auto& s : g.right_sectors) EXPECT_EQ(s.angle_degrees, 0.0);
  EXPECT_EQ(g.left_arcs.size(), 1u);
}

TEST(Glyph, ArcsOrderedWithinUnitInterval) {
  synth::RiskSpec spec;
  spec.rng_seed = 47;
  spec.n_patients = 200;
  for (const auto& [id, r] : synth::generate_corpus(spec).corpus.patients) {
    const auto g = projection::build_glyph(r);
    ASSERT_EQ(g.left_arcs.size(), r.admissions.size());
    EXPECT_EQ(g.left_arcs.front().start_fraction, 0.0);
    EXPECT_EQ(g.left_arcs.back().end_fraction, 1.0);
    for (std::size_t k = 0; k < g.left_arcs.size(); ++k) {
      EXPECT_LT(g.left_arcs[k].start_fraction, g.left_arcs[k].end_fraction);
      if (k > 0) {
        EXPECT_LE(g.left_arcs[k - 1].end_fraction, g.left_arcs[k].start_fraction);
      }
    }
    double total = 0.0;
    for (const auto& s : g.right_sectors) total += s.angle_degrees;
    const bool any = ehr::cumulative_dose(r, ehr::HormoneClass::short_acting) + ehr::cumulative_dose(r, ehr::HormoneClass::medium_acting) +
                         ehr::cumulative_dose(r, ehr::HormoneClass::long_acting) > 0;
    EXPECT_NEAR(total, any ? 180.0 : 0.0, 1e-9);
    EXPECT_NEAR(g.duration_days, ehr::total_stay_days(r), 1e-12);
  }
}

TEST(Glyph, SectorAnglesNeverExceedTheHalfCircle) {
  test::Rng rng(48);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto c = ehr::kHormoneClasses[static_cast<std::size_t>(rng.integer(0, 2))];
    const auto g = projection::build_glyph(record_with_doses({{c, rng.uniform(0.001, 5000.0)}}));
    for (const auto& s : g.right_sectors) {
      EXPECT_GE(s.angle_degrees, 0.0);
      EXPECT_LE(s.angle_degrees, 180.0);
    }
  }
}
