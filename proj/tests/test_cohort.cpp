#include <map>
#include <set>

#include <gtest/gtest.h>

#include "sequela/cohort/cohort.hpp"
#include "sequela/ehr/corpus_json.hpp"
#include "sequela/error.hpp"
#include "sequela/synth/generator.hpp"
#include "sequela/util/stats.hpp"
#include "support.hpp"

using namespace sequela;
using nlohmann::json;

namespace {

synth::Generated generated(std::uint64_t seed, int n, std::map<std::string, double> coefs = {}) {
  synth::RiskSpec spec;
  spec.rng_seed = seed;
  spec.n_patients = n;
  spec.coefficients = std::move(coefs);
  return synth::generate_corpus(spec);
}

/// One-patient document with the given primary code and orders (drug names).
json patient_doc(const std::string& id, const std::string& code, const std::vector<std::string>& drugs) {
  auto doc = test::one_patient_corpus_json();
  auto p = doc["patients"][0];
  p["id"] = id;
  p["admissions"][0]["diagnoses"][0]["code"] = code;
  json orders = json::array();
  for (const auto& d : drugs) {
    orders.push_back({{"drug", d}, {"dose", 10.0}, {"route", "oral"}, {"time", "2021-03-02T12:00:00Z"}});
  }
  p["admissions"][0]["orders"] = orders;
  return p;
}

ehr::Corpus corpus_of(const std::vector<json>& patients) {
  auto doc = test::one_patient_corpus_json();
  doc["patients"] = patients;
  return ehr::parse_corpus(doc.dump());
}

cohort::CohortFilter random_filter(test::Rng& rng) {
  cohort::CohortFilter f;
  if (rng.coin()) {
    const int lo = rng.integer(0, 90);
    f.age_range = std::pair{lo, lo + rng.integer(0, 40)};
  }
  if (rng.coin()) {
    f.genders = std::set<ehr::Gender>{};
    for (auto g : {ehr::Gender::female, ehr::Gender::male, ehr::Gender::other}) {
      if (rng.coin(0.6)) f.genders->insert(g);
    }
  }
  if (rng.coin()) {
    f.hormone_classes = std::set<ehr::HormoneClass>{};
    for (auto c : ehr::kHormoneClasses) {
      if (rng.coin(0.6)) f.hormone_classes->insert(c);
    }
  }
  if (rng.coin()) {
    f.primary_disease_clusters = std::set<std::string>{};
    for (const auto& c : synth::kPlantedPrefixes) {
      if (rng.coin(0.6)) f.primary_disease_clusters->insert(c);
    }
  }
  if (rng.coin()) f.outcome = rng.coin();
  return f;
}

}  // namespace

TEST(ApplyFilter, EmptyFilterSelectsEveryone) {
  const auto g = generated(1, 100);
  const auto sel = cohort::apply_filter(g.corpus, {});
  EXPECT_EQ(sel.patient_ids.size(), 100u);
  EXPECT_TRUE(std::is_sorted(sel.patient_ids.begin(), sel.patient_ids.end()));
}

TEST(ApplyFilter, OutcomeMatchesLabelScan) {
  const auto g = generated(2, 300);
  cohort::CohortFilter f;
  f.outcome = true;
  std::vector<std::string> expected;
  for (const auto& t : g.truth.patients) {
    if (t.label) expected.push_back(t.patient_id);
  }
  EXPECT_EQ(cohort::apply_filter(g.corpus, f).patient_ids, expected);
}

TEST(ApplyFilter, AgeRanges) {
  const auto g = generated(3, 200);
  cohort::CohortFilter f;
  f.age_range = std::pair{200, 300};
  EXPECT_TRUE(cohort::apply_filter(g.corpus, f).patient_ids.empty());
  f.age_range = std::pair{50, 40};
  EXPECT_THROW(cohort::apply_filter(g.corpus, f), FilterError);
  f.age_range = std::pair{40, 60};
  for (const auto& id : cohort::apply_filter(g.corpus, f).patient_ids) {
    const int age = g.corpus.patient(id).age;
    EXPECT_TRUE(age >= 40 && age <= 60);
  }
}

TEST(ApplyFilter, PresentButEmptySetMatchesNoOne) {
  const auto g = generated(4, 50);
  cohort::CohortFilter f;
  f.genders = std::set<ehr::Gender>{};
  EXPECT_TRUE(cohort::apply_filter(g.corpus, f).patient_ids.empty());
}

TEST(ApplyFilter, MatchesIsAConjunctionOfPredicates) {
  const auto g = generated(5, 300);
  test::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_filter(rng);
    std::vector<std::string> expected;
    for (const auto& [id, r] : g.corpus.patients) {
      bool ok = true;
      if (f.age_range) ok = ok && r.age >= f.age_range->first && r.age <= f.age_range->second;
      if (f.genders) ok = ok && f.genders->count(r.gender);
      if (f.outcome) ok = ok && r.outcome.has_sequela == *f.outcome;
      if (f.hormone_classes) {
        bool any = false;
        for (auto c : *f.hormone_classes) any = any || ehr::uses_class(r, c);
        ok = ok && any;
      }
      if (f.primary_disease_clusters) {
        bool any = false;
        for (const auto& a : r.admissions) {
          for (const auto& d : a.diagnoses) {
            any = any || (d.is_primary && f.primary_disease_clusters->count(d.code.substr(0, 3)));
          }
        }
        ok = ok && any;
      }
      if (ok) expected.push_back(id);
    }
    EXPECT_EQ(cohort::apply_filter(g.corpus, f).patient_ids, expected) << cohort::to_json(f).dump();
  }
}

TEST(ApplyFilter, IdempotentOnInducedSubCorpus) {
  const auto g = generated(6, 300);
  test::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_filter(rng);
    const auto sel = cohort::apply_filter(g.corpus, f);
    if (sel.patient_ids.empty()) continue;
    const auto sub = ehr::sub_corpus(g.corpus, sel.patient_ids);
    EXPECT_EQ(cohort::apply_filter(sub, f).patient_ids, sel.patient_ids);
  }
}

TEST(ApplyFilter, AddingAPredicateNeverEnlarges) {
  const auto g = generated(7, 300);
  test::Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_filter(rng);
    const auto before = cohort::apply_filter(g.corpus, f).patient_ids;
    const auto extra = random_filter(rng);
    if (!f.age_range && extra.age_range) f.age_range = extra.age_range;
    else if (!f.genders && extra.genders) f.genders = extra.genders;
    else if (!f.outcome && extra.outcome) f.outcome = extra.outcome;
    else if (!f.hormone_classes && extra.hormone_classes) f.hormone_classes = extra.hormone_classes;
    const auto after = cohort::apply_filter(g.corpus, f).patient_ids;
    EXPECT_TRUE(std::includes(before.begin(), before.end(), after.begin(), after.end()));
  }
}

TEST(FilterJson, RoundTripsAndRejectsBadFields) {
  cohort::CohortFilter f;
  f.age_range = std::pair{18, 65};
  f.genders = std::set<ehr::Gender>{ehr::Gender::female};
  f.hormone_classes = std::set<ehr::HormoneClass>{ehr::HormoneClass::long_acting};
  f.primary_disease_clusters = std::set<std::string>{"M32"};
  f.outcome = false;
  EXPECT_EQ(cohort::cohort_filter_from_json(cohort::to_json(f)), f);
  EXPECT_EQ(cohort::cohort_filter_from_json(json::object()), cohort::CohortFilter{});
  EXPECT_THROW(cohort::cohort_filter_from_json({{"colour", "red"}}), FilterError);
  EXPECT_THROW(cohort::cohort_filter_from_json({{"genders", {"robot"}}}), FilterError);
  EXPECT_THROW(cohort::cohort_filter_from_json({{"age_range", {1}}}), FilterError);
}

TEST(Demographics, SinglePositivePatient) {
  const auto c = ehr::parse_corpus(test::one_patient_corpus_json().dump());
  const auto ch = cohort::build_demographics_channel(c, cohort::select_all(c));
  EXPECT_EQ(ch.with_sequela.points.size(), 1u);
  EXPECT_EQ(ch.without_sequela.points.size(), 0u);
  EXPECT_FALSE(ch.without_sequela.median_age.has_value());
  EXPECT_DOUBLE_EQ(ch.with_sequela.points[0].stay_days, 5.0);
  EXPECT_DOUBLE_EQ(ch.with_sequela.points[0].cumulative_dose, 50.0);
}

TEST(Demographics, GroupsPartitionSelectionAndReflectPlantedDose) {
  const auto g = generated(8, 2000, {{"long_acting_dose", 2.0}});
  const auto sel = cohort::select_all(g.corpus);
  const auto ch = cohort::build_demographics_channel(g.corpus, sel);
  EXPECT_EQ(ch.with_sequela.points.size() + ch.without_sequela.points.size(), 2000u);
  std::vector<double> pos, neg;
  for (const auto& p : ch.with_sequela.points) pos.push_back(p.cumulative_dose);
  for (const auto& p : ch.without_sequela.points) neg.push_back(p.cumulative_dose);
  EXPECT_GT(stats::mean(pos), stats::mean(neg));
  for (const auto& p : ch.with_sequela.points) EXPECT_TRUE(g.corpus.patient(p.patient_id).outcome.has_sequela);
  std::vector<double> ages;
  for (const auto& p : ch.with_sequela.points) ages.push_back(p.age);
  EXPECT_DOUBLE_EQ(*ch.with_sequela.median_age, stats::median(ages));
}

TEST(DiseaseChannel, SharedCodeGivesOneCluster) {
  const auto c = corpus_of({patient_doc("A1", "M32.1", {}), patient_doc("A2", "M32.9", {}),
                            patient_doc("A3", "M32.1", {})});
  const auto clusters = cohort::build_disease_channel(c, cohort::select_all(c));
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].cluster_id, "M32");
  EXPECT_EQ(clusters[0].patient_count, 3);
}

TEST(DiseaseChannel, PatientInTwoClustersCountsInEach) {
  auto p = patient_doc("A1", "M32.1", {});
  auto second = p["admissions"][0];
  second["admit"] = "2021-05-01T00:00:00Z";
  second["discharge"] = "2021-05-04T00:00:00Z";
  second["diagnoses"][0]["code"] = "J45.0";
  second["diagnoses"][0]["text"] = "Asthma";
  for (const char* k : {"labs", "exams", "orders", "notes"}) second[k] = json::array();
  p["admissions"].push_back(second);
  const auto c = corpus_of({p});
  const auto clusters = cohort::build_disease_channel(c, cohort::select_all(c));
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0].patient_count, 1);
  EXPECT_EQ(clusters[1].patient_count, 1);
  EXPECT_EQ(clusters[0].label, "Asthma");
}

TEST(DiseaseChannel, PlantedPrefixesMatchGeneratorCounts) {
  const auto g = generated(9, 1000);
  const auto clusters = cohort::build_disease_channel(g.corpus, cohort::select_all(g.corpus));
  ASSERT_EQ(clusters.size(), synth::kPlantedPrefixes.size());
  for (const auto& cl : clusters) {
    EXPECT_EQ(cl.patient_count, g.truth.primary_prefix_patients.at(cl.cluster_id));
    EXPECT_LE(cl.top_terms.size(), 5u);
    EXPECT_EQ(cl.label, cl.top_terms.front());
  }
}

TEST(DrugChannel, ClassesAlwaysPresent) {
  const auto c = corpus_of({patient_doc("A1", "M32.1", {"hydrocortisone"})});
  const auto ch = cohort::build_drug_channel(c, cohort::select_all(c));
  ASSERT_EQ(ch.size(), 3u);
  EXPECT_EQ(ch[0].hormone_class, ehr::HormoneClass::short_acting);
  EXPECT_EQ(ch[0].patient_count, 1);
  EXPECT_EQ(ch[0].drugs.size(), 1u);
  EXPECT_EQ(ch[1].patient_count, 0);
  EXPECT_TRUE(ch[1].drugs.empty());
  EXPECT_TRUE(ch[2].drugs.empty());

  const auto none = corpus_of({patient_doc("A1", "M32.1", {"omeprazole"})});
  for (const auto& col : cohort::build_drug_channel(none, cohort::select_all(none))) {
    EXPECT_EQ(col.patient_count, 0);
    EXPECT_TRUE(col.drugs.empty());
  }
}

TEST(DrugChannel, CountsMatchGeneratorManifest) {
  const auto g = generated(10, 1000);
  const auto ch = cohort::build_drug_channel(g.corpus, cohort::select_all(g.corpus));
  int bars = 0;
  for (const auto& col : ch) {
    for (const auto& bar : col.drugs) {
      EXPECT_EQ(bar.patient_count, g.truth.drug_patients.at(bar.drug_name)) << bar.drug_name;
      EXPECT_EQ(g.corpus.drug_dictionary.at(bar.drug_name).hormone_class, col.hormone_class);
      ++bars;
    }
  }
  int hormone_drugs = 0;
  for (const auto& [name, n] : g.truth.drug_patients) hormone_drugs += ehr::is_hormone(g.corpus.drug_dictionary.at(name).hormone_class);
  EXPECT_EQ(bars, hormone_drugs);
}

TEST(Sankey, OnePatientOneClusterOneClass) {
  const auto c = corpus_of({patient_doc("A1", "M32.1", {"hydrocortisone"})});
  const auto links = cohort::build_sankey_links(c, cohort::select_all(c));
  ASSERT_EQ(links.size(), 2u);
  int cluster_links = 0;
  for (const auto& l : links) {
    EXPECT_EQ(l.patient_count, 1);
    if (l.source == "cluster:M32") {
      EXPECT_EQ(l.target, "class:short_acting");
      ++cluster_links;
    } else {
      EXPECT_EQ(l.source, "demo:female:40-59");
      EXPECT_EQ(l.target, "cluster:M32");
    }
  }
  EXPECT_EQ(cluster_links, 1);
}

TEST(Sankey, TwoClassesGiveTwoLinks) {
  const auto c = corpus_of({patient_doc("A1", "M32.1", {"hydrocortisone", "dexamethasone", "hydrocortisone"})});
  int from_cluster = 0;
  for (const auto& l : cohort::build_sankey_links(c, cohort::select_all(c))) {
    if (l.source == "cluster:M32") {
      EXPECT_EQ(l.patient_count, 1);
      ++from_cluster;
    }
  }
  EXPECT_EQ(from_cluster, 2);
}

TEST(Sankey, WeightsEqualExhaustivePairTally) {
  const auto g = generated(11, 800);
  const auto sel = cohort::select_all(g.corpus);
  std::map<std::pair<std::string, std::string>, int> expected;
  for (const auto& id : sel.patient_ids) {
    const auto& r = g.corpus.patient(id);
    for (const auto& cluster : synth::kPlantedPrefixes) {
      bool in_cluster = false;
      for (const auto& a : r.admissions) {
        for (const auto& d : a.diagnoses) in_cluster = in_cluster || (d.is_primary && cohort::cluster_of(d.code) == cluster);
      }
      if (!in_cluster) continue;
      ++expected[{"demo:" + cohort::demographic_bin(r), "cluster:" + cluster}];
      for (auto cls : ehr::kHormoneClasses) {
        if (ehr::uses_class(r, cls)) ++expected[{"cluster:" + cluster, "class:" + std::string(ehr::to_string(cls))}];
      }
    }
  }
  std::map<std::pair<std::string, std::string>, int> actual;
  for (const auto& l : cohort::build_sankey_links(g.corpus, sel)) actual[{l.source, l.target}] = l.patient_count;
  EXPECT_EQ(actual, expected);
}

TEST(Channels, PureAndDeterministic) {
  const auto g = generated(12, 300);
  cohort::CohortFilter f;
  f.outcome = false;
  const auto sel = cohort::apply_filter(g.corpus, f);
  const auto a = cohort::to_json(cohort::build_channels(g.corpus, sel)).dump();
  const auto b = cohort::to_json(cohort::build_channels(g.corpus, sel)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(cohort::build_channels(g.corpus, sel), cohort::build_channels(g.corpus, sel));
}
