#include "sequela/ehr/corpus_json.hpp"

#include <iterator>
#include <sstream>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/stringbuffer.h>
#include <rapidjson/writer.h>

#include "sequela/ehr/validate.hpp"
#include "sequela/error.hpp"

// Bulk corpus files are read and written with RapidJSON; nlohmann::json is
// used for the per-record documents the API hands out.

namespace sequela::ehr {

using nlohmann::json;

namespace {

// Field access with JSON-pointer error paths. A Reader refers to its parent,
// which must outlive it; paths are only built when an error is thrown.
class Reader {
 public:
  explicit Reader(const rapidjson::Value& node) : node_(node) {}
  Reader(const rapidjson::Value& node, const Reader* parent, std::string_view key)
      : node_(node), parent_(parent), key_(key) {}
  Reader(const rapidjson::Value& node, const Reader* parent, rapidjson::SizeType index)
      : node_(node), parent_(parent), index_(static_cast<long long>(index)) {}

  const rapidjson::Value& node() const { return node_; }

  std::string path() const {
    if (!parent_) return {};
    return parent_->path() + "/" + (index_ >= 0 ? std::to_string(index_) : std::string(key_));
  }

  Reader field(const char* key) const {
    expect_object();
    auto it = node_.FindMember(key);
    if (it == node_.MemberEnd()) throw SchemaError(path() + "/" + key, "missing required field");
    return Reader(it->value, this, key);
  }

  std::optional<Reader> optional_field(const char* key) const {
    expect_object();
    auto it = node_.FindMember(key);
    if (it == node_.MemberEnd() || it->value.IsNull()) return std::nullopt;
    return Reader(it->value, this, key);
  }

  Reader element(rapidjson::SizeType i) const { return Reader(node_[i], this, i); }

  rapidjson::SizeType array_size() const {
    if (!node_.IsArray()) throw SchemaError(path(), "expected array");
    return node_.Size();
  }

  void expect_object() const {
    if (!node_.IsObject()) throw SchemaError(path(), "expected object");
  }

  std::string string() const {
    if (!node_.IsString()) throw SchemaError(path(), "expected string");
    return std::string(node_.GetString(), node_.GetStringLength());
  }

  double number() const {
    if (!node_.IsNumber()) throw SchemaError(path(), "expected number");
    return node_.GetDouble();
  }

  long long integer() const {
    if (!node_.IsInt64()) throw SchemaError(path(), "expected integer");
    return node_.GetInt64();
  }

  bool boolean() const {
    if (!node_.IsBool()) throw SchemaError(path(), "expected boolean");
    return node_.GetBool();
  }

  Timestamp timestamp() const {
    if (!node_.IsString()) throw SchemaError(path(), "expected timestamp string");
    try {
      return parse_timestamp(std::string_view(node_.GetString(), node_.GetStringLength()));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path(), e.what());
    }
  }

  template <typename T, typename Parse>
  T enumeration(Parse parse, const char* what) const {
    const std::string s = string();
    auto v = parse(s);
    if (!v) throw SchemaError(path(), std::string("unknown ") + what + " '" + s + "'");
    return *v;
  }

 private:
  const rapidjson::Value& node_;
  const Reader* parent_ = nullptr;
  std::string_view key_;
  long long index_ = -1;
};

template <typename T, typename Fn>
std::vector<T> read_list(const Reader& r, const char* key, Fn read_one) {
  std::vector<T> out;
  const Reader list = r.field(key);
  const auto n = list.array_size();
  out.reserve(n);
  for (rapidjson::SizeType i = 0; i < n; ++i) out.push_back(read_one(list.element(i)));
  return out;
}

AdmissionEpisode read_admission(const Reader& r, const DrugDictionary& dict) {
  AdmissionEpisode a;
  a.admit_time = r.field("admit").timestamp();
  a.discharge_time = r.field("discharge").timestamp();
  a.diagnoses = read_list<Diagnosis>(r, "diagnoses", [](const Reader& d) {
    return Diagnosis{d.field("code").string(), d.field("text").string(), d.field("primary").boolean()};
  });
  a.lab_tests = read_list<LabTest>(r, "labs", [](const Reader& l) {
    LabTest lab;
    lab.test_name = l.field("name").string();
    lab.value = l.field("value").number();
    lab.unit = l.field("unit").string();
    if (auto lo = l.optional_field("ref_low")) lab.reference_low = lo->number();
    if (auto hi = l.optional_field("ref_high")) lab.reference_high = hi->number();
    lab.sample_time = l.field("time").timestamp();
    return lab;
  });
  a.examinations = read_list<Examination>(r, "exams", [](const Reader& e) {
    Examination exam;
    exam.exam_name = e.field("name").string();
    exam.result_flag = e.field("flag").enumeration<ResultFlag>(
        [](std::string_view s) { return parse_result_flag(s); }, "result flag");
    exam.report_text = e.field("report").string();
    exam.exam_time = e.field("time").timestamp();
    return exam;
  });
  a.medication_orders = read_list<MedicationOrder>(r, "orders", [&dict](const Reader& o) {
    MedicationOrder order;
    order.drug_name = o.field("drug").string();
    order.dose_mg = o.field("dose").number();
    order.route = o.field("route").string();
    order.order_time = o.field("time").timestamp();
    // Unknown drugs keep the non_hormone placeholder; validation rejects them.
    if (auto it = dict.find(order.drug_name); it != dict.end()) {
      order.hormone_class = it->second.hormone_class;
      order.dose = order.dose_mg * it->second.prednisone_factor;
    } else {
      order.dose = order.dose_mg;
    }
    return order;
  });
  a.medical_notes = read_list<MedicalNote>(r, "notes", [](const Reader& n) {
    return MedicalNote{n.field("time").timestamp(), n.field("text").string()};
  });
  return a;
}

PatientRecord read_patient(const Reader& r, const DrugDictionary& dict) {
  PatientRecord p;
  p.patient_id = r.field("id").string();
  p.age = static_cast<int>(r.field("age").integer());
  p.gender = r.field("gender").enumeration<Gender>([](std::string_view s) { return parse_gender(s); },
                                                  "gender");
  const Reader outcome = r.field("outcome");
  p.outcome.has_sequela = outcome.field("has_sequela").boolean();
  if (auto onset = outcome.optional_field("onset_time")) p.outcome.onset_time = onset->timestamp();
  p.admissions = read_list<AdmissionEpisode>(
      r, "admissions", [&dict](const Reader& a) { return read_admission(a, dict); });
  return p;
}

using Writer = rapidjson::Writer<rapidjson::StringBuffer>;

void write_string(Writer& w, std::string_view s) {
  w.String(s.data(), static_cast<rapidjson::SizeType>(s.size()));
}

void write_time(Writer& w, Timestamp t) { write_string(w, format_timestamp(t)); }

void write_optional(Writer& w, const std::optional<double>& v) {
  if (v) {
    w.Double(*v);
  } else {
    w.Null();
  }
}

void write_patient(Writer& w, const PatientRecord& p) {
  w.StartObject();
  w.Key("id");
  write_string(w, p.patient_id);
  w.Key("age");
  w.Int(p.age);
  w.Key("gender");
  write_string(w, to_string(p.gender));
  w.Key("outcome");
  w.StartObject();
  w.Key("has_sequela");
  w.Bool(p.outcome.has_sequela);
  if (p.outcome.onset_time) {
    w.Key("onset_time");
    write_time(w, *p.outcome.onset_time);
  }
  w.EndObject();
  w.Key("admissions");
  w.StartArray();
  for (const auto& a : p.admissions) {
    w.StartObject();
    w.Key("admit");
    write_time(w, a.admit_time);
    w.Key("discharge");
    write_time(w, a.discharge_time);
    w.Key("diagnoses");
    w.StartArray();
    for (const auto& d : a.diagnoses) {
      w.StartObject();
      w.Key("code");
      write_string(w, d.code);
      w.Key("text");
      write_string(w, d.text);
      w.Key("primary");
      w.Bool(d.is_primary);
      w.EndObject();
    }
    w.EndArray();
    w.Key("labs");
    w.StartArray();
    for (const auto& l : a.lab_tests) {
      w.StartObject();
      w.Key("name");
      write_string(w, l.test_name);
      w.Key("value");
      w.Double(l.value);
      w.Key("unit");
      write_string(w, l.unit);
      w.Key("ref_low");
      write_optional(w, l.reference_low);
      w.Key("ref_high");
      write_optional(w, l.reference_high);
      w.Key("time");
      write_time(w, l.sample_time);
      w.EndObject();
    }
    w.EndArray();
    w.Key("exams");
    w.StartArray();
    for (const auto& e : a.examinations) {
      w.StartObject();
      w.Key("name");
      write_string(w, e.exam_name);
      w.Key("flag");
      write_string(w, to_string(e.result_flag));
      w.Key("report");
      write_string(w, e.report_text);
      w.Key("time");
      write_time(w, e.exam_time);
      w.EndObject();
    }
    w.EndArray();
    w.Key("orders");
    w.StartArray();
    for (const auto& o : a.medication_orders) {
      w.StartObject();
      w.Key("drug");
      write_string(w, o.drug_name);
      w.Key("dose");
      w.Double(o.dose_mg);
      w.Key("route");
      write_string(w, o.route);
      w.Key("time");
      write_time(w, o.order_time);
      w.EndObject();
    }
    w.EndArray();
    w.Key("notes");
    w.StartArray();
    for (const auto& n : a.medical_notes) {
      w.StartObject();
      w.Key("time");
      write_time(w, n.note_time);
      w.Key("text");
      write_string(w, n.text);
      w.EndObject();
    }
    w.EndArray();
    w.EndObject();
  }
  w.EndArray();
  w.EndObject();
}

}  // namespace

Corpus parse_corpus(std::string_view text) {
  rapidjson::Document doc;
  doc.Parse<rapidjson::kParseFullPrecisionFlag>(text.data(), text.size());
  if (doc.HasParseError()) {
    throw SchemaError("", std::string("malformed JSON at offset ") + std::to_string(doc.GetErrorOffset()) +
                              ": " + rapidjson::GetParseError_En(doc.GetParseError()));
  }

  const Reader root(doc);
  Corpus corpus;
  corpus.schema_version = root.field("schema_version").string();

  const Reader dict = root.field("drug_dictionary");
  dict.expect_object();
  for (auto it = dict.node().MemberBegin(); it != dict.node().MemberEnd(); ++it) {
    const std::string name(it->name.GetString(), it->name.GetStringLength());
    const Reader e(it->value, &dict, std::string_view(it->name.GetString(), it->name.GetStringLength()));
    DrugInfo info;
    info.hormone_class = e.field("class").enumeration<HormoneClass>(
        [](std::string_view s) { return parse_hormone_class(s); }, "hormone class");
    info.prednisone_factor = e.field("prednisone_factor").number();
    if (!(info.prednisone_factor >= 0.0)) {
      throw SchemaError(e.path() + "/prednisone_factor", "must be non-negative");
    }
    corpus.drug_dictionary.insert_or_assign(name, info);
  }

  const Reader patients = root.field("patients");
  const auto n = patients.array_size();
  if (n == 0) throw InvariantError("patient count > 0");

  std::vector<std::string> bad_ids;
  std::ostringstream reasons;
  for (rapidjson::SizeType i = 0; i < n; ++i) {
    PatientRecord p = read_patient(patients.element(i), corpus.drug_dictionary);
    const auto violations = validate_record(p, corpus.drug_dictionary);
    if (!violations.empty()) {
      bad_ids.push_back(p.patient_id);
      reasons << "; " << p.patient_id << ": " << violations.front().field << " ("
              << violations.front().rule << ")";
      if (violations.size() > 1) reasons << " +" << violations.size() - 1 << " more";
      continue;
    }
    std::string id = p.patient_id;
    if (!corpus.patients.emplace(id, std::move(p)).second) {
      bad_ids.push_back(id);
      reasons << "; " << id << ": patient_id unique within a corpus";
    }
  }
  if (!bad_ids.empty()) {
    throw InvariantError("invalid patient records" + reasons.str(), std::move(bad_ids));
  }
  return corpus;
}

Corpus parse_corpus(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_corpus(text);
}

Corpus parse_corpus_json(const json& doc) { return parse_corpus(doc.dump()); }

std::string serialize_corpus(const Corpus& corpus) {
  rapidjson::StringBuffer buf;
  Writer w(buf);
  w.StartObject();
  w.Key("schema_version");
  write_string(w, corpus.schema_version);
  w.Key("drug_dictionary");
  w.StartObject();
  for (const auto& [name, info] : corpus.drug_dictionary) {
    write_string(w, name);
    w.StartObject();
    w.Key("class");
    write_string(w, to_string(info.hormone_class));
    w.Key("prednisone_factor");
    w.Double(info.prednisone_factor);
    w.EndObject();
  }
  w.EndObject();
  w.Key("patients");
  w.StartArray();
  for (const auto& [id, p] : corpus.patients) write_patient(w, p);
  w.EndArray();
  w.EndObject();
  return std::string(buf.GetString(), buf.GetSize());
}

json to_json(const Diagnosis& d) {
  return json{{"code", d.code}, {"text", d.text}, {"primary", d.is_primary}};
}

json to_json(const LabTest& lab) {
  return json{{"name", lab.test_name},
              {"value", lab.value},
              {"unit", lab.unit},
              {"ref_low", lab.reference_low ? json(*lab.reference_low) : json(nullptr)},
              {"ref_high", lab.reference_high ? json(*lab.reference_high) : json(nullptr)},
              {"time", format_timestamp(lab.sample_time)}};
}

json to_json(const Examination& exam) {
  return json{{"name", exam.exam_name},
              {"flag", to_string(exam.result_flag)},
              {"report", exam.report_text},
              {"time", format_timestamp(exam.exam_time)}};
}

json to_json(const MedicationOrder& order) {
  return json{{"drug", order.drug_name},
              {"dose", order.dose_mg},
              {"route", order.route},
              {"time", format_timestamp(order.order_time)}};
}

json to_json(const MedicalNote& note) {
  return json{{"time", format_timestamp(note.note_time)}, {"text", note.text}};
}

json to_json(const PatientRecord& p) {
  json admissions = json::array();
  for (const auto& a : p.admissions) {
    json adm = {{"admit", format_timestamp(a.admit_time)},
                {"discharge", format_timestamp(a.discharge_time)},
                {"diagnoses", json::array()},
                {"labs", json::array()},
                {"exams", json::array()},
                {"orders", json::array()},
                {"notes", json::array()}};
    for (const auto& d : a.diagnoses) adm["diagnoses"].push_back(to_json(d));
    for (const auto& l : a.lab_tests) adm["labs"].push_back(to_json(l));
    for (const auto& e : a.examinations) adm["exams"].push_back(to_json(e));
    for (const auto& o : a.medication_orders) adm["orders"].push_back(to_json(o));
    for (const auto& n : a.medical_notes) adm["notes"].push_back(to_json(n));
    admissions.push_back(std::move(adm));
  }
  json outcome = {{"has_sequela", p.outcome.has_sequela}};
  if (p.outcome.onset_time) outcome["onset_time"] = format_timestamp(*p.outcome.onset_time);
  return json{{"id", p.patient_id},
              {"age", p.age},
              {"gender", to_string(p.gender)},
              {"outcome", std::move(outcome)},
              {"admissions", std::move(admissions)}};
}

json corpus_to_json(const Corpus& corpus) { return json::parse(serialize_corpus(corpus)); }

}  // namespace sequela::ehr
