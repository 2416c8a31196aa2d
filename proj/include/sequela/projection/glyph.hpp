#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sequela/ehr/record.hpp"

namespace sequela::projection {

struct GlyphArc {
  double start_fraction = 0.0;
  double end_fraction = 0.0;
};

struct GlyphSector {
  ehr::HormoneClass hormone_class = ehr::HormoneClass::short_acting;
  double angle_degrees = 0.0;
};

/// Left semicircle: the span from first admit to last discharge, mapped
/// linearly onto [0, 1]. Right semicircle: one sector per hormone class.
struct GlyphSpec {
  std::string patient_id;
  double duration_days = 0.0;
  std::string center_text;
  std::vector<GlyphArc> left_arcs;
  std::vector<double> order_ticks;  // medication order times as fractions
  std::array<GlyphSector, 3> right_sectors;
};

GlyphSpec build_glyph(const ehr::PatientRecord& record);

nlohmann::json to_json(const GlyphSpec& glyph);

}  // namespace sequela::projection
