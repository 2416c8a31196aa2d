#include "sequela/projection/glyph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sequela::projection {

GlyphSpec build_glyph(const ehr::PatientRecord& record) {
  GlyphSpec g;
  g.patient_id = record.patient_id;
  g.duration_days = ehr::total_stay_days(record);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gd", std::round(g.duration_days * 10.0) / 10.0);
  g.center_text = buf;

  if (!record.admissions.empty()) {
    const auto t0 = record.admissions.front().admit_time;
    const auto t1 = record.admissions.back().discharge_time;
    const double span = static_cast<double>(t1 - t0);
    auto fraction = [&](ehr::Timestamp t) {
      return span > 0 ? std::clamp(static_cast<double>(t - t0) / span, 0.0, 1.0) : 0.0;
    };
    for (const auto& a : record.admissions) {
      g.left_arcs.push_back({fraction(a.admit_time), fraction(a.discharge_time)});
      for (const auto& o : a.medication_orders) g.order_ticks.push_back(fraction(o.order_time));
    }
    std::sort(g.order_ticks.begin(), g.order_ticks.end());
  }

  std::array<double, 3> dose{};
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    dose[k] = ehr::cumulative_dose(record, ehr::kHormoneClasses[k]);
    total += dose[k];
  }
  for (std::size_t k = 0; k < 3; ++k) {
    g.right_sectors[k] = {ehr::kHormoneClasses[k], total > 0.0 ? 180.0 * (dose[k] / total) : 0.0};
  }
  return g;
}

nlohmann::json to_json(const GlyphSpec& g) {
  nlohmann::json arcs = nlohmann::json::array();
  for (const auto& a : g.left_arcs) arcs.push_back({{"start_fraction", a.start_fraction}, {"end_fraction", a.end_fraction}});
  nlohmann::json sectors = nlohmann::json::array();
  for (const auto& s : g.right_sectors) {
    sectors.push_back({{"class", ehr::to_string(s.hormone_class)}, {"angle_degrees", s.angle_degrees}});
  }
  return {{"patient_id", g.patient_id},
          {"duration_days", g.duration_days},
          {"center_text", g.center_text},
          {"left_arcs", std::move(arcs)},
          {"order_ticks", g.order_ticks},
          {"right_sectors", std::move(sectors)}};
}

}  // namespace sequela::projection
