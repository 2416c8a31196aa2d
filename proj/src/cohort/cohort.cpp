#include "sequela/cohort/cohort.hpp"

#include <algorithm>
#include <array>

#include "sequela/error.hpp"
#include "sequela/util/json.hpp"
#include "sequela/util/stats.hpp"

namespace sequela::cohort {

using ehr::Corpus;
using ehr::HormoneClass;
using ehr::PatientRecord;
using nlohmann::json;

namespace {

std::set<std::string> primary_clusters(const PatientRecord& r) {
  std::set<std::string> out;
  for (const auto& a : r.admissions) {
    for (const auto& d : a.diagnoses) {
      if (d.is_primary) out.insert(cluster_of(d.code));
    }
  }
  return out;
}

std::set<HormoneClass> classes_used(const PatientRecord& r) {
  std::set<HormoneClass> out;
  for (const auto& a : r.admissions) {
    for (const auto& o : a.medication_orders) {
      if (ehr::is_hormone(o.hormone_class)) out.insert(o.hormone_class);
    }
  }
  return out;
}

template <typename Fn>
void for_each_selected(const Corpus& corpus, const CohortSelection& selection, Fn fn) {
  for (const auto& id : selection.patient_ids) fn(corpus.patient(id));
}

DemographicGroup finish_group(std::vector<DemographicPoint> points) {
  DemographicGroup g;
  if (!points.empty()) {
    std::vector<double> age, stay, dose;
    for (const auto& p : points) {
      age.push_back(p.age);
      stay.push_back(p.stay_days);
      dose.push_back(p.cumulative_dose);
    }
    g.median_age = stats::median(age);
    g.median_stay_days = stats::median(stay);
    g.median_cumulative_dose = stats::median(dose);
  }
  g.points = std::move(points);
  return g;
}

json to_json(const DemographicGroup& g) {
  json points = json::array();
  for (const auto& p : g.points) {
    points.push_back({{"patient_id", p.patient_id},
                      {"age", p.age},
                      {"gender", ehr::to_string(p.gender)},
                      {"stay_days", p.stay_days},
                      {"cumulative_dose", p.cumulative_dose}});
  }
  return {{"size", g.points.size()},
          {"points", std::move(points)},
          {"medians",
           {{"age", optional_json(g.median_age)},
            {"stay_days", optional_json(g.median_stay_days)},
            {"cumulative_dose", optional_json(g.median_cumulative_dose)}}}};
}

template <typename T, typename Parse>
std::set<T> parse_enum_set(const json& arr, const char* field, Parse parse) {
  if (!arr.is_array()) throw FilterError(std::string(field) + " must be an array");
  std::set<T> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw FilterError(std::string(field) + " entries must be strings");
    auto parsed = parse(v.template get<std::string>());
    if (!parsed) throw FilterError(std::string("unknown value in ") + field + ": " + v.template get<std::string>());
    out.insert(*parsed);
  }
  return out;
}

}  // namespace

std::string cluster_of(const std::string& code) { return code.substr(0, std::min<std::size_t>(3, code.size())); }

bool matches(const PatientRecord& r, const CohortFilter& f) {
  if (f.age_range && (r.age < f.age_range->first || r.age > f.age_range->second)) return false;
  if (f.genders && !f.genders->contains(r.gender)) return false;
  if (f.outcome && r.outcome.has_sequela != *f.outcome) return false;
  if (f.hormone_classes) {
    const auto used = classes_used(r);
    if (std::none_of(used.begin(), used.end(), [&](HormoneClass c) { return f.hormone_classes->contains(c); })) {
      return false;
    }
  }
  if (f.primary_disease_clusters) {
    const auto clusters = primary_clusters(r);
    if (std::none_of(clusters.begin(), clusters.end(),
                     [&](const std::string& c) { return f.primary_disease_clusters->contains(c); })) {
      return false;
    }
  }
  return true;
}

CohortSelection apply_filter(const Corpus& corpus, const CohortFilter& filter, ehr::Timestamp created_at) {
  if (filter.age_range && filter.age_range->first > filter.age_range->second) {
    throw FilterError("age_range inverted: lo > hi");
  }
  CohortSelection sel;
  sel.filter = filter;
  sel.created_at = created_at;
  for (const auto& [id, record] : corpus.patients) {
    if (matches(record, filter)) sel.patient_ids.push_back(id);
  }
  return sel;  // map order is id order
}

CohortSelection select_all(const Corpus& corpus, ehr::Timestamp created_at) {
  return apply_filter(corpus, CohortFilter{}, created_at);
}

DemographicsChannel build_demographics_channel(const Corpus& corpus, const CohortSelection& selection) {
  std::vector<DemographicPoint> pos, neg;
  for_each_selected(corpus, selection, [&](const PatientRecord& r) {
    DemographicPoint p{r.patient_id, r.age, r.gender, ehr::total_stay_days(r), 0.0};
    for (auto c : ehr::kHormoneClasses) p.cumulative_dose += ehr::cumulative_dose(r, c);
    (r.outcome.has_sequela ? pos : neg).push_back(std::move(p));
  });
  return {finish_group(std::move(pos)), finish_group(std::move(neg))};
}

std::vector<DiseaseCluster> build_disease_channel(const Corpus& corpus, const CohortSelection& selection) {
  std::map<std::string, int> patients;
  std::map<std::string, std::map<std::string, int>> term_counts;
  for_each_selected(corpus, selection, [&](const PatientRecord& r) {
    for (const auto& c : primary_clusters(r)) ++patients[c];
    for (const auto& a : r.admissions) {
      for (const auto& d : a.diagnoses) {
        if (d.is_primary) ++term_counts[cluster_of(d.code)][d.text];
      }
    }
  });

  std::vector<DiseaseCluster> out;
  for (const auto& [id, count] : patients) {
    std::vector<std::pair<std::string, int>> terms(term_counts[id].begin(), term_counts[id].end());
    std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    DiseaseCluster c{id, terms.front().first, count, {}};
    for (std::size_t i = 0; i < terms.size() && i < 5; ++i) c.top_terms.push_back(terms[i].first);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<DrugClassColumn> build_drug_channel(const Corpus& corpus, const CohortSelection& selection) {
  std::vector<DrugClassColumn> out;
  std::array<std::map<std::string, int>, 3> per_drug;
  for (std::size_t i = 0; i < ehr::kHormoneClasses.size(); ++i) out.push_back({ehr::kHormoneClasses[i], 0, {}});

  for_each_selected(corpus, selection, [&](const PatientRecord& r) {
    std::set<std::string> drugs;
    for (const auto& c : classes_used(r)) ++out[static_cast<std::size_t>(c)].patient_count;
    for (const auto& a : r.admissions) {
      for (const auto& o : a.medication_orders) {
        if (ehr::is_hormone(o.hormone_class) && drugs.insert(o.drug_name).second) {
          ++per_drug[static_cast<std::size_t>(o.hormone_class)][o.drug_name];
        }
      }
    }
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& [name, n] : per_drug[i]) out[i].drugs.push_back({name, n});
  }
  return out;
}

std::string demographic_bin(const PatientRecord& r) {
  const char* band = r.age < 18 ? "0-17" : r.age < 40 ? "18-39" : r.age < 60 ? "40-59" : r.age < 80 ? "60-79" : "80+";
  return std::string(ehr::to_string(r.gender)) + ":" + band;
}

std::vector<SankeyLink> build_sankey_links(const Corpus& corpus, const CohortSelection& selection) {
  std::map<std::pair<std::string, std::string>, int> counts;
  for_each_selected(corpus, selection, [&](const PatientRecord& r) {
    const auto clusters = primary_clusters(r);
    const auto classes = classes_used(r);
    const std::string demo = "demo:" + demographic_bin(r);
    for (const auto& c : clusters) {
      ++counts[{demo, "cluster:" + c}];
      for (auto k : classes) ++counts[{"cluster:" + c, "class:" + std::string(ehr::to_string(k))}];
    }
  });
  std::vector<SankeyLink> out;
  for (const auto& [key, n] : counts) out.push_back({key.first, key.second, n});
  return out;
}

ChannelSummary build_channels(const Corpus& corpus, const CohortSelection& selection) {
  return {build_demographics_channel(corpus, selection), build_disease_channel(corpus, selection),
          build_drug_channel(corpus, selection), build_sankey_links(corpus, selection)};
}

json to_json(const CohortFilter& f) {
  json j = json::object();
  if (f.age_range) j["age_range"] = {f.age_range->first, f.age_range->second};
  if (f.genders) {
    j["genders"] = json::array();
    for (auto g : *f.genders) j["genders"].push_back(ehr::to_string(g));
  }
  if (f.hormone_classes) {
    j["hormone_classes"] = json::array();
    for (auto c : *f.hormone_classes) j["hormone_classes"].push_back(ehr::to_string(c));
  }
  if (f.primary_disease_clusters) j["primary_disease_clusters"] = *f.primary_disease_clusters;
  if (f.outcome) j["outcome"] = *f.outcome;
  return j;
}

CohortFilter cohort_filter_from_json(const json& j) {
  if (!j.is_object()) throw FilterError("filter must be an object");
  CohortFilter f;
  for (const auto& [key, value] : j.items()) {
    if (value.is_null()) continue;
    if (key == "age_range") {
      if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() || !value[1].is_number_integer()) {
        throw FilterError("age_range must be [lo, hi] integers");
      }
      f.age_range = std::pair{value[0].get<int>(), value[1].get<int>()};
    } else if (key == "genders") {
      f.genders = parse_enum_set<ehr::Gender>(value, "genders", [](const std::string& s) { return ehr::parse_gender(s); });
    } else if (key == "hormone_classes") {
      f.hormone_classes = parse_enum_set<HormoneClass>(
          value, "hormone_classes", [](const std::string& s) { return ehr::parse_hormone_class(s); });
    } else if (key == "primary_disease_clusters") {
      if (!value.is_array()) throw FilterError("primary_disease_clusters must be an array");
      std::set<std::string> s;
      for (const auto& v : value) {
        if (!v.is_string()) throw FilterError("primary_disease_clusters entries must be strings");
        s.insert(v.get<std::string>());
      }
      f.primary_disease_clusters = std::move(s);
    } else if (key == "outcome") {
      if (!value.is_boolean()) throw FilterError("outcome must be a boolean");
      f.outcome = value.get<bool>();
    } else {
      throw FilterError("unknown filter field: " + key);
    }
  }
  return f;
}

json to_json(const CohortSelection& s) {
  return {{"filter", to_json(s.filter)},
          {"patient_ids", s.patient_ids},
          {"size", s.patient_ids.size()},
          {"created_at", ehr::format_timestamp(s.created_at)}};
}

json to_json(const ChannelSummary& c) {
  json clusters = json::array();
  for (const auto& d : c.disease_clusters) {
    clusters.push_back(
        {{"cluster_id", d.cluster_id}, {"label", d.label}, {"patient_count", d.patient_count}, {"top_terms", d.top_terms}});
  }
  json drugs = json::array();
  for (const auto& col : c.drug_channel) {
    json bars = json::array();
    for (const auto& b : col.drugs) bars.push_back({{"drug", b.drug_name}, {"patient_count", b.patient_count}});
    drugs.push_back({{"class", ehr::to_string(col.hormone_class)}, {"patient_count", col.patient_count}, {"drugs", std::move(bars)}});
  }
  json links = json::array();
  for (const auto& l : c.sankey_links) {
    links.push_back({{"source", l.source}, {"target", l.target}, {"patient_count", l.patient_count}});
  }
  return {{"demographics",
           {{"axes", {"age", "gender", "stay_days", "cumulative_dose"}},
            {"with_sequela", to_json(c.demographics.with_sequela)},
            {"without_sequela", to_json(c.demographics.without_sequela)}}},
          {"disease_clusters", std::move(clusters)},
          {"drug_channel", std::move(drugs)},
          {"sankey_links", std::move(links)}};
}

}  // namespace sequela::cohort
