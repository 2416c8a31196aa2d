#include "sequela/synth/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "sequela/error.hpp"
#include "sequela/util/seed.hpp"
#include "sequela/util/stats.hpp"

namespace sequela::synth {

using ehr::HormoneClass;
using ehr::Timestamp;

namespace {

struct DrugTemplate {
  const char* name;
  HormoneClass cls;
  double prednisone_factor;
  double typical_mg;
  const char* route;
};

constexpr std::array<DrugTemplate, 8> kDrugs = {{
    {"hydrocortisone", HormoneClass::short_acting, 0.25, 100.0, "iv"},
    {"cortisone", HormoneClass::short_acting, 0.2, 100.0, "oral"},
    {"prednisone", HormoneClass::medium_acting, 1.0, 40.0, "oral"},
    {"methylprednisolone", HormoneClass::medium_acting, 1.25, 32.0, "iv"},
    {"dexamethasone", HormoneClass::long_acting, 6.67, 6.0, "iv"},
    {"betamethasone", HormoneClass::long_acting, 8.33, 5.0, "im"},
    {"calcium carbonate", HormoneClass::non_hormone, 0.0, 600.0, "oral"},
    {"omeprazole", HormoneClass::non_hormone, 0.0, 20.0, "oral"},
}};

struct DiagnosisTemplate {
  const char* code;
  const char* text;
};

// Indexed like kPlantedPrefixes: J45, M06, M32.
constexpr std::array<std::array<DiagnosisTemplate, 2>, 3> kPrimaryDiagnoses = {{
    {{{"J45.0", "Predominantly allergic asthma"}, {"J45.9", "Asthma, unspecified"}}},
    {{{"M06.0", "Rheumatoid arthritis without rheumatoid factor"},
      {"M06.9", "Rheumatoid arthritis, unspecified"}}},
    {{{"M32.1", "Systemic lupus erythematosus with organ involvement"},
      {"M32.9", "Systemic lupus erythematosus, unspecified"}}},
}};
constexpr std::array<double, 3> kPrefixWeights = {0.3, 0.2, 0.5};

// Per-admission probability of any order from each glucocorticoid class
// before confounding.
constexpr std::array<double, 3> kClassBaseUse = {0.25, 0.35, 0.25};

constexpr double kDoseUnitMg = 100.0;
constexpr double kAgeUnitYears = 50.0;

struct LabTemplate {
  const char* name;
  const char* unit;
  double ref_low;
  double ref_high;
};

// Same order as kCanonicalLabs.
constexpr std::array<LabTemplate, 3> kLabs = {{
    {"ALT", "U/L", 7.0, 40.0},
    {"CRP", "mg/L", 0.0, 10.0},
    {"Calcium", "mmol/L", 2.1, 2.6},
}};

constexpr std::array<const char*, 3> kExams = {"Hip MRI", "Chest X-ray", "Bone density scan"};

// Everything about one patient that is drawn before labeling.
struct Draft {
  ehr::PatientRecord record;
  double confounder = 0.0;
  double label_uniform = 0.0;
  int onset_extra_days = 0;
};

double round_to(double v, double step) { return std::round(v / step) * step; }

std::string patient_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "P%06d", index + 1);
  return buf;
}

Draft draw_patient(const RiskSpec& spec, int index, Timestamp epoch) {
  std::mt19937_64 rng(derive_seed(spec.rng_seed, static_cast<std::uint64_t>(index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&rng](long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(rng);
  };
  std::normal_distribution<double> gauss(0.0, 1.0);

  Draft d;
  d.label_uniform = unit(rng);
  d.onset_extra_days = static_cast<int>(uniform_int(1, 365));

  auto& p = d.record;
  p.patient_id = patient_id(index);
  p.age = static_cast<int>(uniform_int(18, 85));
  const double g = unit(rng);
  p.gender = g < 0.55 ? ehr::Gender::female : (g < 0.98 ? ehr::Gender::male : ehr::Gender::other);
  d.confounder = 2.0 * unit(rng);

  const int n_adm = static_cast<int>(uniform_int(1, 5));
  Timestamp cursor = epoch + uniform_int(0, 1500) * ehr::kSecondsPerDay;
  for (int a = 0; a < n_adm; ++a) {
    ehr::AdmissionEpisode adm;
    const long long length_days = uniform_int(3, 30);
    adm.admit_time = cursor + uniform_int(0, 23) * 3600;
    adm.discharge_time = adm.admit_time + length_days * ehr::kSecondsPerDay;
    auto event_time = [&] { return uniform_int(adm.admit_time, adm.discharge_time); };

    const double r = unit(rng);
    std::size_t prefix = 0;
    for (double acc = kPrefixWeights[0]; prefix + 1 < kPrefixWeights.size() && r >= acc;) {
      acc += kPrefixWeights[++prefix];
    }
    const auto& primary = kPrimaryDiagnoses[prefix][static_cast<std::size_t>(uniform_int(0, 1))];
    adm.diagnoses.push_back({primary.code, primary.text, true});
    if (unit(rng) < 0.2) adm.diagnoses.push_back({"E11.9", "Type 2 diabetes mellitus", false});
    if (unit(rng) < 0.25) adm.diagnoses.push_back({"I10", "Essential hypertension", false});

    for (std::size_t c = 0; c < 3; ++c) {
      const double use = std::clamp(
          kClassBaseUse[c] + 0.15 * spec.confounder_strength * d.confounder, 0.0, 0.95);
      if (unit(rng) >= use) continue;
      const std::size_t drug = 2 * c + static_cast<std::size_t>(uniform_int(0, 1));
      const auto& t = kDrugs[drug];
      const long long n_orders = uniform_int(1, std::min<long long>(4, length_days));
      for (long long k = 0; k < n_orders; ++k) {
        ehr::MedicationOrder o;
        o.drug_name = t.name;
        o.hormone_class = t.cls;
        o.dose_mg = round_to(t.typical_mg * (0.5 + unit(rng)), 0.5);
        o.dose = o.dose_mg * t.prednisone_factor;
        o.route = t.route;
        o.order_time = event_time();
        adm.medication_orders.push_back(std::move(o));
      }
    }
    for (std::size_t drug = 6; drug < kDrugs.size(); ++drug) {
      if (unit(rng) >= 0.4) continue;
      const auto& t = kDrugs[drug];
      ehr::MedicationOrder o;
      o.drug_name = t.name;
      o.hormone_class = t.cls;
      o.dose_mg = t.typical_mg;
      o.dose = o.dose_mg * t.prednisone_factor;
      o.route = t.route;
      o.order_time = event_time();
      adm.medication_orders.push_back(std::move(o));
    }
    std::stable_sort(adm.medication_orders.begin(), adm.medication_orders.end(),
                     [](const auto& x, const auto& y) { return x.order_time < y.order_time; });

    for (std::size_t l = 0; l < kLabs.size(); ++l) {
      if (unit(rng) >= 0.85) continue;
      const long long n_draws = uniform_int(1, 2);
      for (long long k = 0; k < n_draws; ++k) {
        double value = 0.0;
        switch (l) {
          case 0: value = std::max(3.0, 25.0 + 8.0 * gauss(rng)); break;
          case 1: value = std::max(0.1, 3.0 + 3.0 * spec.confounder_strength * d.confounder + 2.0 * gauss(rng)); break;
          default: value = 2.35 + 0.12 * gauss(rng); break;
        }
        ehr::LabTest lab;
        lab.test_name = kLabs[l].name;
        lab.value = round_to(value, 0.01);
        lab.unit = kLabs[l].unit;
        lab.reference_low = kLabs[l].ref_low;
        lab.reference_high = kLabs[l].ref_high;
        lab.sample_time = event_time();
        adm.lab_tests.push_back(std::move(lab));
      }
    }

    for (const char* exam : kExams) {
      if (unit(rng) >= 0.35) continue;
      const double f = unit(rng);
      ehr::Examination e;
      e.exam_name = exam;
      e.result_flag = f < 0.05 ? ehr::ResultFlag::unknown
                               : (f < 0.25 ? ehr::ResultFlag::abnormal : ehr::ResultFlag::normal);
      e.report_text = std::string(exam) + ": " + std::string(ehr::to_string(e.result_flag)) + " findings";
      e.exam_time = event_time();
      adm.examinations.push_back(std::move(e));
    }

    adm.medical_notes.push_back({adm.admit_time, "Admitted for " + std::string(primary.text) + "."});

    p.admissions.push_back(std::move(adm));
    cursor = p.admissions.back().discharge_time + uniform_int(14, 240) * ehr::kSecondsPerDay;
  }
  return d;
}

std::map<std::string, double> risk_features(const Draft& d) {
  const auto& r = d.record;
  return {
      {"short_acting_dose", ehr::cumulative_dose(r, HormoneClass::short_acting) / kDoseUnitMg},
      {"medium_acting_dose", ehr::cumulative_dose(r, HormoneClass::medium_acting) / kDoseUnitMg},
      {"long_acting_dose", ehr::cumulative_dose(r, HormoneClass::long_acting) / kDoseUnitMg},
      {"age", r.age / kAgeUnitYears},
      {"confounder", d.confounder},
  };
}

double solve_intercept(const std::vector<double>& scores, double base_rate) {
  auto mean_probability = [&scores](double b0) {
    double s = 0.0;
    for (double x : scores) s += stats::logistic(b0 + x);
    return s / static_cast<double>(scores.size());
  };
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_probability(mid) < base_rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void validate_spec(const RiskSpec& spec) {
  if (spec.n_patients <= 0) throw SpecError("n_patients must be > 0");
  if (!(spec.base_rate > 0.0 && spec.base_rate < 1.0)) throw SpecError("base_rate must lie in (0, 1)");
  if (spec.latency_days < 0) throw SpecError("latency_days must be >= 0");
  if (!std::isfinite(spec.confounder_strength) || spec.confounder_strength < 0.0) {
    throw SpecError("confounder_strength must be finite and >= 0");
  }
  for (const auto& [name, coef] : spec.coefficients) {
    if (std::find(kRiskFeatures.begin(), kRiskFeatures.end(), name) == kRiskFeatures.end()) {
      throw SpecError("unknown coefficient '" + name + "'");
    }
    if (!std::isfinite(coef)) throw SpecError("coefficient '" + name + "' must be finite");
  }
}

RiskSpec risk_spec_from_json(const nlohmann::json& j) {
  RiskSpec s;
  try {
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    s.n_patients = j.at("n_patients").get<int>();
    s.base_rate = j.at("base_rate").get<double>();
    if (j.contains("coefficients")) s.coefficients = j.at("coefficients").get<std::map<std::string, double>>();
    s.latency_days = j.value("latency_days", 30);
    s.confounder_strength = j.value("confounder_strength", 1.0);
    s.calibrate_intercept = j.value("calibrate_intercept", true);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("bad risk spec: ") + e.what());
  }
  validate_spec(s);
  return s;
}

nlohmann::json to_json(const RiskSpec& s) {
  return {{"rng_seed", s.rng_seed},
          {"n_patients", s.n_patients},
          {"base_rate", s.base_rate},
          {"coefficients", s.coefficients},
          {"latency_days", s.latency_days},
          {"confounder_strength", s.confounder_strength},
          {"calibrate_intercept", s.calibrate_intercept}};
}

Generated generate_corpus(const RiskSpec& spec) {
  validate_spec(spec);
  const Timestamp epoch = ehr::parse_timestamp("2015-01-01T00:00:00Z");

  std::vector<Draft> drafts;
  drafts.reserve(static_cast<std::size_t>(spec.n_patients));
  for (int i = 0; i < spec.n_patients; ++i) drafts.push_back(draw_patient(spec, i, epoch));

  std::vector<std::map<std::string, double>> features;
  std::vector<double> scores;
  for (const auto& d : drafts) {
    auto f = risk_features(d);
    double s = 0.0;
    for (const auto& [name, coef] : spec.coefficients) s += coef * f.at(name);
    features.push_back(std::move(f));
    scores.push_back(s);
  }
  const double b0 = spec.calibrate_intercept
                        ? solve_intercept(scores, spec.base_rate)
                        : std::log(spec.base_rate / (1.0 - spec.base_rate));

  Generated out;
  auto& corpus = out.corpus;
  corpus.schema_version = std::string(ehr::kSchemaVersion);
  for (const auto& t : kDrugs) corpus.drug_dictionary.emplace(t.name, ehr::DrugInfo{t.cls, t.prednisone_factor});

  auto& truth = out.truth;
  truth.coefficients = spec.coefficients;
  truth.intercept = b0;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto& d = drafts[i];
    auto& rec = d.record;
    const double p = stats::logistic(b0 + scores[i]);
    const bool label = d.label_uniform < p;
    rec.outcome.has_sequela = label;
    if (label) {
      const Timestamp anchor = ehr::first_hormone_exposure(rec).value_or(rec.admissions.front().admit_time);
      rec.outcome.onset_time =
          anchor + static_cast<Timestamp>(spec.latency_days + d.onset_extra_days) * ehr::kSecondsPerDay;
    }

    std::set<std::string> prefixes, drugs;
    for (const auto& a : rec.admissions) {
      for (const auto& dx : a.diagnoses) {
        if (dx.is_primary) prefixes.insert(dx.code.substr(0, 3));
      }
      for (const auto& o : a.medication_orders) drugs.insert(o.drug_name);
    }
    for (const auto& pre : prefixes) ++truth.primary_prefix_patients[pre];
    for (const auto& drug : drugs) ++truth.drug_patients[drug];

    truth.patients.push_back({rec.patient_id, p, label, std::move(features[i])});
    std::string id = rec.patient_id;
    corpus.patients.emplace(std::move(id), std::move(rec));
  }
  return out;
}

nlohmann::json to_json(const GroundTruth& gt) {
  nlohmann::json patients = nlohmann::json::array();
  for (const auto& p : gt.patients) {
    patients.push_back(
        {{"id", p.patient_id}, {"probability", p.probability}, {"label", p.label}, {"features", p.features}});
  }
  return {{"coefficients", gt.coefficients},
          {"intercept", gt.intercept},
          {"primary_prefix_patients", gt.primary_prefix_patients},
          {"drug_patients", gt.drug_patients},
          {"patients", std::move(patients)}};
}

GroundTruthReport ground_truth_report(const GroundTruth& gt) {
  GroundTruthReport r;
  r.n_patients = gt.patients.size();
  std::vector<double> probs;
  std::vector<int> labels;
  for (const auto& p : gt.patients) {
    probs.push_back(p.probability);
    labels.push_back(p.label ? 1 : 0);
    r.n_positive += p.label ? 1 : 0;
  }
  if (auto auc = stats::rank_auc(probs, labels)) r.true_auc = auc->auc;
  for (const auto& [name, coef] : gt.coefficients) r.effect_signs[name] = (coef > 0) - (coef < 0);
  return r;
}

nlohmann::json to_json(const GroundTruthReport& r) {
  return {{"true_auc", r.true_auc ? nlohmann::json(*r.true_auc) : nlohmann::json(nullptr)},
          {"auc_defined", r.true_auc.has_value()},
          {"effect_signs", r.effect_signs},
          {"n_patients", r.n_patients},
          {"n_positive", r.n_positive}};
}

}  // namespace sequela::synth
