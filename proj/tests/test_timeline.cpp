#include <gtest/gtest.h>

#include "sequela/ehr/corpus_json.hpp"
#include "sequela/error.hpp"
#include "sequela/synth/generator.hpp"
#include "sequela/timeline/timeline.hpp"
#include "support.hpp"

using namespace sequela;
using timeline::Lane;

namespace {

ehr::PatientRecord the_patient(const nlohmann::json& doc) { return ehr::parse_corpus(doc.dump()).patients.begin()->second; }

}  // namespace

TEST(Timeline, LanesHaveFixedIdentityAndOrder) {
  const auto doc = timeline::build_timeline(the_patient(test::one_patient_corpus_json()));
  ASSERT_EQ(doc.lanes.size(), 3u);
  EXPECT_EQ(timeline::lane_title(doc.lanes[0].lane), "Medication Order");
  EXPECT_EQ(timeline::lane_title(doc.lanes[1].lane), "Laboratory Tests");
  EXPECT_EQ(timeline::lane_title(doc.lanes[2].lane), "Checks Information");
  for (auto l : timeline::kLanes) EXPECT_EQ(timeline::parse_lane(timeline::lane_key(l)), l);
  EXPECT_FALSE(timeline::parse_lane("notes").has_value());
}

TEST(Timeline, EmptyLaneStaysPresent) {
  auto j = test::one_patient_corpus_json();
  j["patients"][0]["admissions"][0]["labs"] = nlohmann::json::array();
  const auto r = the_patient(j);
  const auto doc = timeline::build_timeline(r);
  EXPECT_TRUE(doc.lane(Lane::laboratory_tests).events.empty());
  EXPECT_EQ(doc.t0, r.admissions.front().admit_time);
  EXPECT_EQ(doc.t1, r.admissions.back().discharge_time);
  EXPECT_EQ(doc.lane(Lane::medication_orders).events.size(), 1u);
  EXPECT_EQ(timeline::to_json(doc)["lanes"].size(), 3u);
}

TEST(Timeline, LayerTwoCarriesNameAndValue) {
  const auto doc = timeline::build_timeline(the_patient(test::one_patient_corpus_json()));
  const auto& lab = doc.lane(Lane::laboratory_tests).events.at(0);
  EXPECT_EQ(lab.name, "CRP");
  EXPECT_EQ(lab.value, 14.5);
  EXPECT_EQ(lab.value_label, "mg/L");
  const auto& exam = doc.lane(Lane::checks_information).events.at(0);
  EXPECT_EQ(exam.name, "MRI hip");
  EXPECT_EQ(exam.value_label, "abnormal");
}

TEST(Timeline, CountsAndTimesMatchSourceRecords) {
  synth::RiskSpec spec;
  spec.rng_seed = 21;
  spec.n_patients = 200;
  const auto corpus = synth::generate_corpus(spec).corpus;
  for (const auto& [id, r] : corpus.patients) {
    const auto doc = timeline::build_timeline(r);
    std::size_t orders = 0, labs = 0, exams = 0;
    for (const auto& a : r.admissions) {
      orders += a.medication_orders.size();
      labs += a.lab_tests.size();
      exams += a.examinations.size();
    }
    EXPECT_EQ(doc.lane(Lane::medication_orders).events.size(), orders);
    EXPECT_EQ(doc.lane(Lane::laboratory_tests).events.size(), labs);
    EXPECT_EQ(doc.lane(Lane::checks_information).events.size(), exams);
    ASSERT_EQ(doc.admissions.size(), r.admissions.size());
    for (std::size_t i = 0; i < r.admissions.size(); ++i) {
      EXPECT_EQ(doc.admissions[i].first, r.admissions[i].admit_time);
      EXPECT_EQ(doc.admissions[i].second, r.admissions[i].discharge_time);
    }
    for (const auto& lane : doc.lanes) {
      for (std::size_t i = 0; i < lane.events.size(); ++i) {
        EXPECT_GE(lane.events[i].time, doc.t0);
        EXPECT_LE(lane.events[i].time, doc.t1);
        if (i > 0) {
          EXPECT_LE(lane.events[i - 1].time, lane.events[i].time);
        }
      }
    }
    EXPECT_EQ(timeline::build_timeline(r), doc);
  }
}

TEST(ExpandEvent, LabCarriesReferenceRange) {
  const auto r = the_patient(test::one_patient_corpus_json());
  const auto doc = timeline::build_timeline(r);
  const auto copy = doc;
  const auto d = timeline::expand_event(r, doc, Lane::laboratory_tests, 0);
  const auto& lab = std::get<ehr::LabTest>(d.event);
  EXPECT_EQ(lab, r.admissions[0].lab_tests[0]);
  EXPECT_EQ(lab.reference_low, 0.0);
  EXPECT_EQ(lab.reference_high, 10.0);
  EXPECT_EQ(doc, copy);
}

TEST(ExpandEvent, OrderIsVerbatimWithSameDayNotes) {
  const auto r = the_patient(test::one_patient_corpus_json());
  const auto doc = timeline::build_timeline(r);
  const auto d = timeline::expand_event(r, doc, Lane::medication_orders, 0);
  EXPECT_EQ(std::get<ehr::MedicationOrder>(d.event), r.admissions[0].medication_orders[0]);
  ASSERT_EQ(d.notes.size(), 1u);
  EXPECT_EQ(d.notes[0].text, "Started pulse steroids.");
  const auto exam = timeline::expand_event(r, doc, Lane::checks_information, 0);
  EXPECT_TRUE(exam.notes.empty());
}

TEST(ExpandEvent, OutOfRangeIsIndexError) {
  const auto r = the_patient(test::one_patient_corpus_json());
  const auto doc = timeline::build_timeline(r);
  EXPECT_THROW(timeline::expand_event(r, doc, Lane::medication_orders, 1), IndexError);
  EXPECT_THROW(timeline::expand_event(r, doc, Lane::checks_information, 99), IndexError);
}

TEST(ExpandEvent, EveryEventResolvesToItsSource) {
  synth::RiskSpec spec;
  spec.rng_seed = 22;
  spec.n_patients = 40;
  const auto corpus = synth::generate_corpus(spec).corpus;
  for (const auto& [id, r] : corpus.patients) {
    const auto doc = timeline::build_timeline(r);
    for (auto l : timeline::kLanes) {
      const auto& events = doc.lane(l).events;
      for (std::size_t i = 0; i < events.size(); ++i) {
        const auto d = timeline::expand_event(r, doc, l, i);
        const auto& adm = r.admissions[events[i].source.admission_index];
        const auto k = events[i].source.event_index;
        switch (l) {
          case Lane::medication_orders: EXPECT_EQ(std::get<ehr::MedicationOrder>(d.event), adm.medication_orders[k]); break;
          case Lane::laboratory_tests: EXPECT_EQ(std::get<ehr::LabTest>(d.event), adm.lab_tests[k]); break;
          case Lane::checks_information: EXPECT_EQ(std::get<ehr::Examination>(d.event), adm.examinations[k]); break;
        }
        for (const auto& n : d.notes) {
          EXPECT_EQ(n.note_time / ehr::kSecondsPerDay, events[i].time / ehr::kSecondsPerDay);
        }
      }
    }
  }
}
